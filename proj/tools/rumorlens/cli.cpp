#include "cli.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rumorlens/dataset_io.hpp"
#include "rumorlens/errors.hpp"
#include "rumorlens/evaluation.hpp"
#include "rumorlens/experiments.hpp"
#include "rumorlens/model.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/training.hpp"

namespace rumorlens::cli {

namespace {

constexpr const char* kSeedEnv = "RUMORLENS_SEED";

struct Options {
  std::string data;
  std::string model;
  std::string out;
  std::string in;
  std::string config;
  std::string format = "text";
  std::string select = "accuracy";

  std::vector<std::string> variants;
  std::uint64_t seed = 42;
  std::size_t k = 10;
  std::size_t workers = 1;
  bool per_fold_vocab = false;
  bool by_event = false;
  bool verbose = false;

  // single-run hyperparameters (train, cross-validate)
  std::size_t epochs = Hyperparams{}.epochs;
  std::size_t batch_size = Hyperparams{}.batch_size;
  double lr = Hyperparams{}.learning_rate;
  double dropout = Hyperparams{}.dropout_rate;
  std::string activation = "relu";

  // grid-search candidate lists
  std::vector<std::size_t> grid_epochs;
  std::vector<std::size_t> grid_batch_sizes;
  std::vector<double> grid_lrs;
  std::vector<double> grid_dropouts;
  std::vector<std::string> grid_activations;

  std::size_t max_len = kDefaultMaxLen;
  std::size_t min_count = kDefaultMinCount;
  std::size_t max_vocab = kDefaultMaxVocab;
  std::size_t embed_dim = ModelConfig{}.embed_dim;
  std::size_t hidden = ModelConfig{}.hidden;
  std::size_t filters = ModelConfig{}.n_filters;
  std::size_t kernel_width = ModelConfig{}.kernel_width;
  std::size_t pool = ModelConfig{}.pool;

  std::size_t n = 2000;
  double signal = 0.9;
};

/// Serializes terminal output from fold/grid worker threads.
class Console {
 public:
  Console(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  void out(const std::string& text) {
    std::lock_guard lock(mutex_);
    out_ << text << std::flush;
  }
  void err(const std::string& text) {
    std::lock_guard lock(mutex_);
    err_ << text << std::flush;
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::mutex mutex_;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) out += (k ? " " : "") + items[k];
  return out;
}

template <typename T>
std::vector<std::string> as_strings(const std::vector<T>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    std::ostringstream s;
    s << v;
    out.push_back(s.str());
  }
  return out;
}

std::string number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// ---- option registration ---------------------------------------------------

void add_data_options(CLI::App& cmd, Options& o, bool required) {
  auto* data = cmd.add_option("--data", o.data, "JSONL corpus (id, text, label, event per line)");
  if (required) data->required();
  cmd.add_option("--max-len", o.max_len, "tokens per padded sequence")->capture_default_str();
  cmd.add_option("--min-count", o.min_count, "minimum token frequency for the vocabulary")
      ->capture_default_str();
  cmd.add_option("--max-vocab", o.max_vocab, "vocabulary size cap, PAD and OOV included")
      ->capture_default_str();
}

void add_model_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--embed-dim", o.embed_dim, "embedding width")->capture_default_str();
  cmd.add_option("--hidden", o.hidden, "LSTM hidden size")->capture_default_str();
  cmd.add_option("--filters", o.filters, "convolution filters (lstm_cnn)")->capture_default_str();
  cmd.add_option("--kernel-width", o.kernel_width, "convolution kernel width (lstm_cnn)")
      ->capture_default_str();
  cmd.add_option("--pool", o.pool, "max-pool window (lstm_cnn)")->capture_default_str();
}

void add_single_run_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
  cmd.add_option("--batch-size", o.batch_size, "minibatch size")->capture_default_str();
  cmd.add_option("--lr", o.lr, "SGD learning rate")->capture_default_str();
  cmd.add_option("--dropout", o.dropout, "dropout rate (lstm_dropout)")->capture_default_str();
  cmd.add_option("--activation", o.activation, "convolution activation")
      ->check(CLI::IsMember({"relu", "tanh"}))
      ->capture_default_str();
}

void add_seed_option(CLI::App& cmd, Options& o) {
  cmd.add_option("--seed", o.seed, std::string("random seed (falls back to $") + kSeedEnv + ")")
      ->capture_default_str();
}

void add_config_option(CLI::App& cmd, Options& o) {
  cmd.add_option("--config", o.config, "flat JSON file of flag values; flags override it");
}

void add_cv_options(CLI::App& cmd, Options& o) {
  cmd.add_option("--k", o.k, "number of folds")->capture_default_str();
  cmd.add_option("--workers", o.workers, "parallel worker threads")->capture_default_str();
  cmd.add_flag("--per-fold-vocab", o.per_fold_vocab, "build the vocabulary inside each fold");
  cmd.add_flag("--by-event", o.by_event, "hold out one event per fold instead of k-fold");
  cmd.add_option("--format", o.format, "table format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();
}

// ---- config file and environment ----------------------------------------

void apply_config_file(CLI::App& cmd, const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file '" + path + "' must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config") throw ConfigError("config file may not set 'config'");
    CLI::Option* opt = cmd.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw ConfigError("config file key '" + key + "' is not an option of '" + cmd.get_name() + "'");
    }
    if (opt->count() > 0) continue;  // the command line wins
    const auto text = [&](const nlohmann::json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
      if (v.is_number()) return v.dump();
      throw ConfigError("config file key '" + key + "' has an unsupported value " + v.dump());
    };
    opt->clear();
    if (value.is_array()) {
      for (const auto& item : value) opt->add_result(text(item));
    } else {
      opt->add_result(text(value));
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError("config file key '" + key + "': " + e.what());
    }
  }
}

void apply_seed_env(CLI::App& cmd, Options& o) {
  CLI::Option* seed = cmd.get_option_no_throw("--seed");
  if (seed == nullptr || seed->count() > 0) return;
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') throw ConfigError(std::string("$") + kSeedEnv + " is not an integer");
  o.seed = value;
}

// ---- resolved configuration ------------------------------------------------

using Resolved = std::map<std::string, std::string>;

Resolved resolve(const std::string& command, const Options& o) {
  Resolved r{{"command", command}, {"seed", std::to_string(o.seed)}};
  const auto model_keys = [&] {
    r["max-len"] = std::to_string(o.max_len);
    r["min-count"] = std::to_string(o.min_count);
    r["max-vocab"] = std::to_string(o.max_vocab);
    r["embed-dim"] = std::to_string(o.embed_dim);
    r["hidden"] = std::to_string(o.hidden);
    r["filters"] = std::to_string(o.filters);
    r["kernel-width"] = std::to_string(o.kernel_width);
    r["pool"] = std::to_string(o.pool);
  };
  const auto single_run = [&] {
    r["epochs"] = std::to_string(o.epochs);
    r["batch-size"] = std::to_string(o.batch_size);
    r["lr"] = number(o.lr);
    r["dropout"] = number(o.dropout);
    r["activation"] = o.activation;
  };
  if (command == "train") {
    model_keys();
    single_run();
    r["data"] = o.data;
    r["variant"] = join(o.variants);
  } else if (command == "cross-validate") {
    model_keys();
    single_run();
    r["data"] = o.data;
    r["variant"] = join(o.variants);
    r["k"] = std::to_string(o.k);
    r["per-fold-vocab"] = o.per_fold_vocab ? "true" : "false";
    r["by-event"] = o.by_event ? "true" : "false";
  } else if (command == "grid-search") {
    model_keys();
    r["data"] = o.data;
    r["variant"] = join(o.variants);
    r["k"] = std::to_string(o.k);
    r["epochs"] = join(as_strings(o.grid_epochs));
    r["batch-size"] = join(as_strings(o.grid_batch_sizes));
    r["lr"] = join(as_strings(o.grid_lrs));
    r["dropout"] = join(as_strings(o.grid_dropouts));
    r["activation"] = join(o.grid_activations);
    r["select"] = o.select;
    r["per-fold-vocab"] = o.per_fold_vocab ? "true" : "false";
    r["by-event"] = o.by_event ? "true" : "false";
  } else if (command == "synthesize") {
    r["n"] = std::to_string(o.n);
    r["signal"] = number(o.signal);
    r["max-len"] = std::to_string(o.max_len);
  } else if (command == "predict") {
    r["data"] = o.data;
    r["model"] = o.model;
  }
  return r;
}

std::string digest(const Resolved& r) {
  std::string canonical;
  for (const auto& [key, value] : r) canonical += key + "=" + value + "\n";
  return hex64(fnv1a(canonical));
}

// ---- shared helpers ------------------------------------------------------

PipelineOptions pipeline(const Options& o) {
  return {o.max_len, o.min_count, o.max_vocab, PadSide::kPre};
}

ModelConfig model_config(const Options& o, Variant variant) {
  ModelConfig c;
  c.variant = variant;
  c.max_len = o.max_len;
  c.embed_dim = o.embed_dim;
  c.hidden = o.hidden;
  c.n_filters = o.filters;
  c.kernel_width = o.kernel_width;
  c.pool = o.pool;
  c.seed = o.seed;
  return c;
}

Hyperparams hyperparams(const Options& o) {
  Hyperparams h;
  h.epochs = o.epochs;
  h.batch_size = o.batch_size;
  h.learning_rate = o.lr;
  h.dropout_rate = o.dropout;
  h.conv_activation = parse_activation(o.activation);
  return h;
}

std::vector<Variant> selected_variants(const std::vector<std::string>& names) {
  std::vector<Variant> out;
  for (const auto& name : names) {
    if (name == "all") {
      out.assign(std::begin(kAllVariants), std::end(kAllVariants));
      return out;
    }
    out.push_back(parse_variant(name));
  }
  return out;
}

/// Checks every model-shape constraint before any data is read.
void validate_shapes(const Options& o, const std::vector<Variant>& variants, const Hyperparams& h) {
  h.validate();
  for (Variant v : variants) h.apply_to(model_config(o, v)).validate();
}

Dataset load_dataset(const Options& o, Console& console) {
  LoadReport report;
  Dataset dataset = load_jsonl(o.data, pipeline(o), &report);
  for (const auto& e : report.errors) {
    console.err("warning: " + o.data + ":" + std::to_string(e.line) + ": " + e.message + "\n");
  }
  console.err("# loaded " + std::to_string(dataset.size()) + " examples (" +
              std::to_string(dataset.class_counts[1]) + " rumour, " +
              std::to_string(dataset.class_counts[0]) + " non-rumour), vocabulary " +
              std::to_string(dataset.vocab.size()) + "\n");
  return dataset;
}

void emit(const Options& o, Console& console, const std::string& text) {
  if (o.out.empty()) {
    console.out(text);
  } else {
    write_file_atomically(o.out, text);
  }
}

// ---- subcommands -------------------------------------------------------------

int cmd_train(Options& o, Console& console) {
  const auto variants = selected_variants(o.variants);
  if (variants.size() != 1) throw ConfigError("train takes exactly one --variant");
  const Hyperparams h = hyperparams(o);
  validate_shapes(o, variants, h);

  const Dataset dataset = load_dataset(o, console);
  ModelConfig config = h.apply_to(model_config(o, variants.front()));
  config.vocab_size = dataset.vocab.size();
  Model model = build_model(config);
  std::uint64_t mix = o.seed;
  Rng rng(splitmix64(mix));
  fit(model, dataset.examples, h, rng, [&](std::size_t epoch, double loss) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "epoch %zu/%zu loss %.6f\n", epoch, h.epochs, loss);
    console.err(buf);
  });
  model.mode = Mode::kEval;
  save_model(model, dataset.vocab, o.model);

  char buf[160];
  std::snprintf(buf, sizeof buf, "trained %s on %zu examples; training accuracy %.2f\n",
                to_string(config.variant).c_str(), dataset.size(), 100.0 * accuracy(model, dataset.examples));
  console.out(buf);
  console.out("model written to " + o.model + "\n");
  return kExitOk;
}

int cmd_predict(Options& o, Console& console) {
  const SavedModel saved = load_model(o.model);
  LoadReport report;
  const auto records = read_jsonl_records(o.data, report, /*require_label=*/false);
  for (const auto& e : report.errors) {
    console.err("warning: " + o.data + ":" + std::to_string(e.line) + ": " + e.message + "\n");
  }
  std::vector<EncodedExample> batch;
  batch.reserve(records.size());
  for (const auto& r : records) {
    batch.push_back({encode_and_pad(tokenize(r.text), saved.vocab, saved.model.config.max_len),
                     r.label, r.event, r.id});
  }
  const auto probs = predict(saved.model, batch);
  std::string text = "id,probability,prediction\n";
  for (std::size_t k = 0; k < batch.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ",%.6f,%d\n", probs[k], probs[k] >= kDecisionThreshold ? 1 : 0);
    std::string id = batch[k].id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = quoted + "\"";
    }
    text += id + buf;
  }
  emit(o, console, text);
  return kExitOk;
}

int cmd_cross_validate(Options& o, Console& console, const Resolved& resolved) {
  const auto variants = selected_variants(o.variants);
  const Hyperparams h = hyperparams(o);
  validate_shapes(o, variants, h);
  const ReportFormat format = parse_report_format(o.format);

  const Dataset dataset = load_dataset(o, console);
  CvOptions cv;
  cv.workers = o.workers;
  cv.per_fold_vocab = o.per_fold_vocab;
  cv.by_event = o.by_event;
  if (o.verbose) {
    cv.on_epoch = [&](std::size_t fold, std::size_t epoch, double loss) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "fold %zu epoch %zu loss %.6f\n", fold + 1, epoch, loss);
      console.err(buf);
    };
  }

  ResultsDocument doc;
  doc.seed = o.seed;
  doc.k = o.k;
  doc.config = resolved;
  doc.grid.variants = variants;
  doc.grid.batch_sizes = {h.batch_size};
  doc.grid.epochs = {h.epochs};
  doc.grid.learning_rates = {h.learning_rate};
  doc.grid.activations = {h.conv_activation};
  doc.grid.dropout_rates = {h.dropout_rate};

  std::string text;
  for (std::size_t index = 0; index < variants.size(); ++index) {
    const Variant variant = variants[index];
    console.err("# cross-validating " + to_string(variant) + "\n");
    const auto started = std::chrono::steady_clock::now();
    ExperimentResult r;
    r.combination_index = index;
    r.variant = variant;
    r.hyper = h;
    r.seed = o.seed;
    const CvResult result = cross_validate(model_config(o, variant), h, dataset, o.k, o.seed, cv);
    r.folds = result.folds;
    r.mean = result.mean;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    r.completed_at = utc_timestamp();
    doc.results.push_back(r);

    if (format == ReportFormat::kText) text += "## " + display_name(variant) + "\n";
    text += render_fold_table(result.folds, result.mean, format);
    text += "\n";
  }
  if (format == ReportFormat::kText) text += "## Summary\n";
  text += render_report(doc.results, format);
  console.out(text);

  // A single-combination "grid" in variant order; rank follows that order.
  for (std::size_t i = 0; i < doc.results.size(); ++i) doc.results[i].rank = i + 1;
  if (!o.out.empty()) {
    save_results(doc, o.out);
    console.err("# results written to " + o.out + "\n");
  }
  return kExitOk;
}

int cmd_grid_search(Options& o, Console& console, const Resolved& resolved) {
  GridSpec grid;
  grid.variants = selected_variants(o.variants);
  if (!o.grid_epochs.empty()) grid.epochs = o.grid_epochs;
  if (!o.grid_batch_sizes.empty()) grid.batch_sizes = o.grid_batch_sizes;
  if (!o.grid_lrs.empty()) grid.learning_rates = o.grid_lrs;
  if (!o.grid_dropouts.empty()) grid.dropout_rates = o.grid_dropouts;
  if (!o.grid_activations.empty()) {
    grid.activations.clear();
    for (const auto& a : o.grid_activations) grid.activations.push_back(parse_activation(a));
  }
  grid.validate();
  for (const auto& c : grid.combinations()) c.hyper.apply_to(model_config(o, c.variant)).validate();
  const SelectionMetric selection = parse_selection_metric(o.select);
  const ReportFormat format = parse_report_format(o.format);

  const Dataset dataset = load_dataset(o, console);
  console.err("# grid of " + std::to_string(grid.size()) + " combinations\n");
  GridOptions options;
  options.workers = o.workers;
  options.cv.per_fold_vocab = o.per_fold_vocab;
  options.cv.by_event = o.by_event;
  options.on_result = [&](const ExperimentResult& r) {
    char buf[200];
    if (r.status == RunStatus::kOk) {
      std::snprintf(buf, sizeof buf, "# done %zu: %s acc %.2f f1 %.2f\n", r.combination_index + 1,
                    to_string(r.variant).c_str(), r.mean.accuracy, r.mean.f1_pos);
    } else {
      std::snprintf(buf, sizeof buf, "# failed %zu: %s\n", r.combination_index + 1, r.error.c_str());
    }
    console.err(buf);
  };

  ResultsDocument doc;
  doc.grid = grid;
  doc.seed = o.seed;
  doc.k = o.k;
  doc.selection = selection;
  doc.config = resolved;
  doc.results = grid_search(grid, model_config(o, Variant::kLstm), dataset, o.k, o.seed, selection, options);

  std::string text;
  const bool csv = format == ReportFormat::kCsv;
  text += csv ? "rank,variant,batch_size,epochs,lr,activation,dropout,acc,f1_pos,status\n"
              : "rank  variant       batch  epochs  lr        activation  dropout  ACC     F-M     status\n";
  for (const auto& r : doc.results) {
    char buf[256];
    const std::string rank = r.rank ? std::to_string(r.rank) : "-";
    const char* status = r.status == RunStatus::kOk ? "ok" : "failed";
    if (csv) {
      std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%g,%s,%g,%.2f,%.2f,%s\n", rank.c_str(),
                    to_string(r.variant).c_str(), r.hyper.batch_size, r.hyper.epochs,
                    r.hyper.learning_rate, to_string(r.hyper.conv_activation).c_str(),
                    r.hyper.dropout_rate, r.mean.accuracy, r.mean.f1_pos, status);
    } else {
      std::snprintf(buf, sizeof buf, "%-4s  %-12s  %5zu  %6zu  %-8g  %-10s  %7g  %6.2f  %6.2f  %s\n",
                    rank.c_str(), to_string(r.variant).c_str(), r.hyper.batch_size, r.hyper.epochs,
                    r.hyper.learning_rate, to_string(r.hyper.conv_activation).c_str(),
                    r.hyper.dropout_rate, r.mean.accuracy, r.mean.f1_pos, status);
    }
    text += buf;
  }
  text += "\n";
  text += render_report(doc.results, format);
  console.out(text);
  if (!o.out.empty()) {
    save_results(doc, o.out);
    console.err("# results written to " + o.out + "\n");
  }
  return kExitOk;
}

int cmd_synthesize(Options& o, Console& console) {
  if (o.out.empty()) throw ConfigError("synthesize needs --out");
  const auto records = synthesize_records(o.n, o.signal, o.seed, o.max_len);
  write_jsonl(o.out, records);
  std::size_t rumours = 0;
  for (const auto& r : records) rumours += r.label == 1;
  console.out("wrote " + std::to_string(records.size()) + " records (" + std::to_string(rumours) +
              " rumour, " + std::to_string(records.size() - rumours) + " non-rumour) to " + o.out + "\n");
  return kExitOk;
}

int cmd_report(Options& o, Console& console) {
  const ResultsDocument doc = load_results(o.in);
  emit(o, console, render_report(doc.results, parse_report_format(o.format)));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  Console console(out, err);

  CLI::App app{"rumorlens: LSTM, LSTM-dropout and LSTM-CNN rumour classifiers for short texts"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  CLI::App* train = app.add_subcommand("train", "train one model on a corpus and save it");
  add_data_options(*train, o, true);
  add_model_options(*train, o);
  add_single_run_options(*train, o);
  add_seed_option(*train, o);
  add_config_option(*train, o);
  train->add_option("--variant", o.variants, "lstm | lstm_dropout | lstm_cnn [lstm]")
      ->check(CLI::IsMember({"lstm", "lstm_dropout", "lstm_cnn"}));
  train->add_option("--model", o.model, "output model file")->required();
  train->add_option("--workers", o.workers, "accepted for uniformity; training is sequential");

  CLI::App* predict_cmd = app.add_subcommand("predict", "score a JSONL corpus with a saved model");
  predict_cmd->add_option("--data", o.data, "JSONL records to score (label optional)")->required();
  predict_cmd->add_option("--model", o.model, "model file written by train")->required();
  predict_cmd->add_option("--out", o.out, "write CSV here instead of standard output");
  add_config_option(*predict_cmd, o);

  CLI::App* cv = app.add_subcommand("cross-validate", "stratified k-fold cross validation");
  add_data_options(*cv, o, true);
  add_model_options(*cv, o);
  add_single_run_options(*cv, o);
  add_seed_option(*cv, o);
  add_config_option(*cv, o);
  add_cv_options(*cv, o);
  cv->add_option("--variant", o.variants, "lstm | lstm_dropout | lstm_cnn | all [all]")
      ->check(CLI::IsMember({"lstm", "lstm_dropout", "lstm_cnn", "all"}));
  cv->add_option("--out", o.out, "write a results JSON document here");
  cv->add_flag("--verbose", o.verbose, "print per-epoch loss for every fold");

  CLI::App* grid = app.add_subcommand("grid-search", "cross-validate every hyperparameter combination");
  add_data_options(*grid, o, true);
  add_model_options(*grid, o);
  add_seed_option(*grid, o);
  add_config_option(*grid, o);
  add_cv_options(*grid, o);
  grid->add_option("--variant", o.variants, "variants to search, or all [all]")
      ->check(CLI::IsMember({"lstm", "lstm_dropout", "lstm_cnn", "all"}));
  grid->add_option("--epochs", o.grid_epochs, "candidate epoch counts [5 10 20]");
  grid->add_option("--batch-size", o.grid_batch_sizes, "candidate batch sizes [16 32 64]");
  grid->add_option("--lr", o.grid_lrs, "candidate learning rates [0.1 0.01 0.001]");
  grid->add_option("--dropout", o.grid_dropouts, "candidate dropout rates [0.2]");
  grid->add_option("--activation", o.grid_activations, "candidate conv activations [relu tanh]")
      ->check(CLI::IsMember({"relu", "tanh"}));
  grid->add_option("--select", o.select, "ranking metric")
      ->check(CLI::IsMember({"accuracy", "f1_pos"}))
      ->capture_default_str();
  grid->add_option("--out", o.out, "write a results JSON document here");

  CLI::App* synth = app.add_subcommand("synthesize", "write a synthetic labeled corpus as JSONL");
  synth->add_option("--out", o.out, "output JSONL file")->required();
  synth->add_option("--n", o.n, "number of records")->capture_default_str();
  synth->add_option("--signal", o.signal, "signal strength in [0.5, 1]")->capture_default_str();
  synth->add_option("--max-len", o.max_len, "maximum tokens per record")->capture_default_str();
  add_seed_option(*synth, o);
  add_config_option(*synth, o);

  CLI::App* report = app.add_subcommand("report", "render a results JSON document as a table");
  report->add_option("--in", o.in, "results JSON from cross-validate or grid-search")->required();
  report->add_option("--format", o.format, "table format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();
  report->add_option("--out", o.out, "write the table here instead of standard output");
  add_config_option(*report, o);

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv.begin(), argv.end());  // CLI11 consumes a reversed vector

  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    if (!o.config.empty()) apply_config_file(*cmd, o.config);
    apply_seed_env(*cmd, o);
    if (o.variants.empty()) o.variants = {name == "train" ? "lstm" : "all"};
    const Resolved resolved = resolve(name, o);
    console.err("# rumorlens " + name + " seed=" + std::to_string(o.seed) +
                " config_digest=" + digest(resolved) + "\n");

    if (name == "train") return cmd_train(o, console);
    if (name == "predict") return cmd_predict(o, console);
    if (name == "cross-validate") return cmd_cross_validate(o, console, resolved);
    if (name == "grid-search") return cmd_grid_search(o, console, resolved);
    if (name == "synthesize") return cmd_synthesize(o, console);
    if (name == "report") return cmd_report(o, console);
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n\n" << cmd->help();
    return kExitUsage;
  } catch (const TrainingDivergedError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace rumorlens::cli
