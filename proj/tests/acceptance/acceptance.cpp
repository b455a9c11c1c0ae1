// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria can be selected by number on the command line
// (e.g. `rumorlens_acceptance 1 5 6`); with no arguments all nine run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "rumorlens/dataset_io.hpp"
#include "rumorlens/evaluation.hpp"
#include "rumorlens/experiments.hpp"
#include "rumorlens/layers.hpp"
#include "rumorlens/model.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/training.hpp"

namespace fs = std::filesystem;
using namespace rumorlens;
using rumorlens::testing::brute_force_metrics;
using rumorlens::testing::check_fold_plan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "rumorlens_acceptance";
  fs::create_directories(dir);
  return dir;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rumorlens");
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// 1. End-to-end gradient check, three variants, five seeds.
Outcome gradient_checks() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string where;
  bool pad_ok = true;
  for (Variant v : kAllVariants) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const ModelConfig config = rumorlens::testing::tiny_config(v, seed);
      Rng data_rng(seed * 1000 + 17);
      const auto batch = rumorlens::testing::random_batch(4, config.max_len, config.vocab_size, data_rng);
      const auto report = rumorlens::testing::gradient_check(build_model(config), batch, seed + 99);
      pad_ok &= report.pad_row_zero;
      if (report.max_rel >= worst) {
        worst = report.max_rel;
        where = to_string(v) + " seed " + std::to_string(seed) + " " + report.worst;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-4 && pad_ok && elapsed < 30.0,
          fmt("max relative error %.3g, %.1f s", worst, elapsed) + " (worst: " + where + ")"};
}

// 2. Each variant fits 32 separable examples.
Outcome overfit() {
  const Dataset data = synthesize_corpus(32, 1.0, 11);
  bool pass = true;
  std::string detail;
  for (Variant v : kAllVariants) {
    const auto start = Clock::now();
    ModelConfig config;
    config.variant = v;
    config.vocab_size = data.vocab.size();
    config.seed = 5;
    Model model = build_model(config);
    Hyperparams h;
    h.learning_rate = 0.05;
    h.batch_size = 8;
    h.epochs = 1;
    Rng rng(77);
    std::size_t epoch = 0;
    double acc = 0.0;
    while (epoch < 300 && acc < 1.0) {
      fit(model, data.examples, h, rng);
      ++epoch;
      acc = accuracy(model, data.examples);
    }
    const double elapsed = seconds_since(start);
    pass &= acc == 1.0 && elapsed < 60.0;
    detail += to_string(v) + fmt(" %.0f%% after %.0f epochs (%.1f s); ", 100.0 * acc, double(epoch), elapsed);
  }
  return {pass, detail};
}

// 3. Ten-fold CV on the desk-scale synthetic corpus with default hyperparameters.
Outcome desk_scale_protocol() {
  const auto start = Clock::now();
  const Dataset data = synthesize_corpus(2000, 0.9, 7);
  const Hyperparams defaults;
  bool pass = true;
  std::string detail;
  for (Variant v : kAllVariants) {
    ModelConfig config;
    config.variant = v;
    const CvResult r = cross_validate(config, defaults, data, 10, 42);
    const double floor = v == Variant::kLstm ? 95.0 : 90.0;
    pass &= r.folds.size() == 10 && r.mean.accuracy >= floor;
    detail += to_string(v) + fmt(" %.2f%% (>= %.0f); ", r.mean.accuracy, floor);
  }
  const double elapsed = seconds_since(start);
  pass &= elapsed < 600.0;
  return {pass, detail + fmt("%.0f s total", elapsed)};
}

// 4. (a) A corpus of ~5,800 tweets in the interchange format goes through
// `cross-validate --variant all`; (b) stored table rows render byte-exact.
Outcome table_reproduction() {
  std::string detail;
  bool pass = true;

  struct Stored {
    Variant variant;
    double acc, pre, rec, f1;
    const char* expected;
  };
  const Stored rows[] = {
      {Variant::kLstm, 82.29, 44.35, 40.55, 40.59, "LSTM  82.29  44.35  40.55  40.59"},
      {Variant::kLstmDropout, 73.78, 39.67, 29.71, 30.93, "LSTMDrop  73.78  39.67  29.71  30.93"},
      {Variant::kLstmCnn, 80.38, 43.94, 39.53, 39.70, "LSTM-CNN  80.38  43.94  39.53  39.70"},
  };
  std::size_t exact = 0;
  for (const auto& s : rows) {
    ExperimentResult r;
    r.variant = s.variant;
    r.mean.accuracy = s.acc;
    r.mean.precision_pos = s.pre;
    r.mean.recall_pos = s.rec;
    r.mean.f1_pos = s.f1;
    exact += render_row(r) == s.expected;
  }
  pass &= exact == 3;
  detail += "(b) " + std::to_string(exact) + "/3 rows byte-exact; ";

  const fs::path corpus = scratch_dir() / "pheme_format_5800.jsonl";
  write_jsonl(corpus, synthesize_records(5800, 0.75, 2024));
  const auto start = Clock::now();
  const CliRun run = run_cli({"cross-validate", "--data", corpus.string(), "--variant", "all", "--epochs", "1",
                              "--format", "csv"});
  const double elapsed = seconds_since(start);
  // The summary table is the last CSV block: header then one row per variant.
  const auto at = run.out.rfind("technique,acc,pre,rec,f_m\n");
  std::size_t valid_rows = 0;
  std::set<std::string> techniques;
  if (run.code == 0 && at != std::string::npos) {
    std::istringstream lines(run.out.substr(at));
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
      std::istringstream cells(line);
      std::string name, cell;
      std::getline(cells, name, ',');
      std::size_t in_range = 0;
      while (std::getline(cells, cell, ',')) {
        const double v = std::stod(cell);
        in_range += v >= 0.0 && v <= 100.0;
      }
      if (in_range == 4) {
        ++valid_rows;
        techniques.insert(name);
      }
    }
  }
  const bool shaped = valid_rows == 3 && techniques == std::set<std::string>{"LSTM", "LSTMDrop", "LSTM-CNN"};
  pass &= shaped;
  detail += "(a) exit " + std::to_string(run.code) + ", " + std::to_string(valid_rows) +
            " rows with metrics in [0,100]" + fmt(", %.0f s", elapsed);
  return {pass, detail};
}

// 5. compute_metrics against a pair-by-pair recount.
Outcome metrics_oracle() {
  Rng rng(2718);
  std::size_t mismatches = 0, degenerate = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<int> preds(n), labels(n);
    // Every fifth vector is degenerate: one class only in labels, preds or both.
    const int mode = trial % 5 == 0 ? static_cast<int>(rng.below(4)) : -1;
    for (std::size_t i = 0; i < n; ++i) {
      preds[i] = static_cast<int>(rng.below(2));
      labels[i] = static_cast<int>(rng.below(2));
      if (mode == 0 || mode == 2) labels[i] = mode == 0 ? 1 : 0;
      if (mode == 1 || mode == 2) preds[i] = mode == 1 ? 1 : 0;
      if (mode == 3) preds[i] = labels[i];
    }
    degenerate += mode >= 0;
    if (compute_metrics(confusion(preds, labels)) != brute_force_metrics(preds, labels)) ++mismatches;
  }
  return {mismatches == 0,
          std::to_string(mismatches) + " mismatches in 1000 vectors (" + std::to_string(degenerate) + " degenerate)"};
}

// 6. Fold plans over randomized datasets.
Outcome cv_partitions() {
  Rng rng(31337);
  std::size_t failures = 0;
  std::string first;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(12);
    const std::size_t pos = k + rng.below(80), neg = k + rng.below(80);
    std::vector<int> labels(pos, 1);
    labels.insert(labels.end(), neg, 0);
    rng.shuffle(std::span<int>(labels));
    const std::uint64_t seed = rng.next_u64();
    const FoldPlan a = stratified_kfold(labels, k, seed);
    const FoldPlan b = stratified_kfold(labels, k, seed);
    std::string problem = check_fold_plan(a, labels);
    if (problem.empty() && !(a == b)) problem = "same seed gave different plans";
    if (!problem.empty()) {
      if (failures++ == 0) first = problem;
    }
  }
  return {failures == 0, std::to_string(failures) + " failing instances of 200" +
                             (first.empty() ? "" : " (first: " + first + ")")};
}

// 7. Dropout in eval mode, at rate 0, and its mean at rate 0.2.
Outcome dropout_contract() {
  const auto start = Clock::now();
  Rng rng(8);
  Matrix x(100, 100);
  for (double& v : x.data()) v = rng.uniform(-3.0, 3.0);

  Rng untouched(9), reference(9);
  const bool eval_identity = dropout(x, {0.2, Mode::kEval}, untouched).out == x;
  const bool rate0_identity = dropout(x, {0.0, Mode::kTrain}, untouched).out == x;
  const bool no_draws = untouched.next_u64() == reference.next_u64();

  Matrix ones(100, 100, 1.0);
  Rng masks(10);
  const Matrix dropped = dropout(ones, {0.2, Mode::kTrain}, masks).out;
  double sum = 0.0;
  for (double v : dropped.data()) sum += v;
  const double mean = sum / static_cast<double>(dropped.size());
  const double elapsed = seconds_since(start);
  const bool pass = eval_identity && rate0_identity && no_draws && mean >= 0.98 && mean <= 1.02 && elapsed < 5.0;
  return {pass, std::string("eval identity ") + (eval_identity ? "yes" : "no") + ", rate-0 identity " +
                    (rate0_identity ? "yes" : "no") + fmt(", train mean %.4f over 10000 entries, %.2f s", mean, elapsed)};
}

// 8. Two identical cross-validate invocations print identical tables.
Outcome determinism() {
  const fs::path corpus = scratch_dir() / "determinism.jsonl";
  write_jsonl(corpus, synthesize_records(300, 0.8, 3));
  const std::vector<std::string> args = {"cross-validate", "--data", corpus.string(), "--variant", "all",
                                         "--epochs", "2", "--k", "5", "--seed", "123"};
  const CliRun first = run_cli(args);
  const CliRun second = run_cli(args);
  const bool pass = first.code == 0 && second.code == 0 && !first.out.empty() && first.out == second.out;
  return {pass, "exit codes " + std::to_string(first.code) + "/" + std::to_string(second.code) + ", " +
                    std::to_string(first.out.size()) + " bytes, " +
                    (first.out == second.out ? "identical" : "different")};
}

// 9. save_model/load_model preserve forward outputs bit-for-bit.
Outcome persistence() {
  Rng rng(4242);
  std::size_t identical = 0;
  const fs::path path = scratch_dir() / "model.json";
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig c;
    c.variant = kAllVariants[trial % 3];
    c.vocab_size = 3 + rng.below(40);
    c.embed_dim = 1 + rng.below(8);
    c.hidden = 1 + rng.below(8);
    c.n_filters = 1 + rng.below(5);
    c.kernel_width = 1 + rng.below(3);
    c.pool = 1 + rng.below(3);
    c.max_len = c.kernel_width + c.pool + rng.below(10);
    c.conv_activation = rng.bernoulli(0.5) ? Activation::kRelu : Activation::kTanh;
    c.dropout_rate = rng.uniform(0.0, 0.5);
    c.seed = rng.next_u64();
    Model model = build_model(c);
    auto batch = rumorlens::testing::random_batch(6, c.max_len, c.vocab_size, rng);
    // A few SGD steps so the parameters are not just the seeded initial state.
    for (int step = 0; step < 3; ++step) train_step(model, batch, 0.1, rng);
    model.mode = Mode::kEval;

    std::vector<std::string> tokens;
    for (std::size_t t = 2; t < c.vocab_size; ++t) tokens.push_back("tok" + std::to_string(t));
    save_model(model, Vocabulary::from_ranked_tokens(tokens), path);
    const SavedModel loaded = load_model(path);
    bool same = loaded.model.config == c && predict(loaded.model, batch) == predict(model, batch);
    const auto a = model.named_parameters();
    const auto b = loaded.model.named_parameters();
    same &= a.size() == b.size();
    for (std::size_t p = 0; same && p < a.size(); ++p) same &= *a[p].second == *b[p].second;
    identical += same;
  }
  return {identical == 20, std::to_string(identical) + "/20 configs bit-identical after reload"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient check", gradient_checks},
      {"overfit 32 examples", overfit},
      {"desk-scale 10-fold protocol", desk_scale_protocol},
      {"table 2 shape and rows", table_reproduction},
      {"metrics oracle", metrics_oracle},
      {"cv partition properties", cv_partitions},
      {"dropout contract", dropout_contract},
      {"cli determinism", determinism},
      {"persistence round-trip", persistence},
  };
  std::set<std::size_t> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::stoul(argv[a]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
