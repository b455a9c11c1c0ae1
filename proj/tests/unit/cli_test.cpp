#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "rumorlens/dataset_io.hpp"
#include "rumorlens/experiments.hpp"

namespace fs = std::filesystem;
using namespace rumorlens;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "rumorlens");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "rumorlens_cli_test";
    fs::create_directories(dir_);
    write_jsonl(dir_ / "corpus.jsonl", synthesize_records(80, 0.9, 5));
  }
  void SetUp() override { unsetenv("RUMORLENS_SEED"); }

  static std::string path(const std::string& name) { return (dir_ / name).string(); }
  static std::string corpus() { return path("corpus.jsonl"); }

  // Small, fast model flags shared by the training commands.
  static std::vector<std::string> small(std::vector<std::string> args) {
    for (const char* f : {"--embed-dim", "6", "--hidden", "6", "--filters", "3", "--epochs", "2"}) args.push_back(f);
    return args;
  }

  static fs::path dir_;
};

fs::path CliTest::dir_;

std::string seed_line(const std::string& err) {
  const auto at = err.find("# rumorlens");
  return at == std::string::npos ? "" : err.substr(at, err.find('\n', at) - at);
}

}  // namespace

TEST_F(CliTest, HelpForEverySubcommandExitsZero) {
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  for (const char* cmd : {"train", "predict", "cross-validate", "grid-search", "synthesize", "report"}) {
    const CliResult r = run({cmd, "--help"});
    EXPECT_EQ(r.code, cli::kExitOk) << cmd;
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << cmd;
  }
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"fly"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "--data", corpus()}).code, cli::kExitUsage);  // --model missing
  const CliResult bad_flag = run({"cross-validate", "--data", corpus(), "--bogus"});
  EXPECT_EQ(bad_flag.code, cli::kExitUsage);
  EXPECT_NE(bad_flag.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"cross-validate", "--data", corpus(), "--variant", "gru"}).code, cli::kExitUsage);
}

TEST_F(CliTest, MaxLenBelowKernelWidthIsConfigError) {
  const CliResult r = run({"train", "--variant", "lstm_cnn", "--max-len", "2", "--kernel-width", "3", "--data",
                     "/does/not/exist.jsonl", "--model", path("never.json")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("max_len (2) < kernel_width (3)"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("never.json")));
}

TEST_F(CliTest, DataErrorsExitTwo) {
  EXPECT_EQ(run({"cross-validate", "--data", "/does/not/exist.jsonl"}).code, cli::kExitData);
  std::ofstream(path("garbage.jsonl")) << "nope\nnope\n";
  EXPECT_EQ(run({"train", "--data", path("garbage.jsonl"), "--model", path("m.json")}).code, cli::kExitData);
  EXPECT_EQ(run({"report", "--in", path("garbage.jsonl")}).code, cli::kExitData);
  EXPECT_EQ(run(small({"cross-validate", "--data", corpus(), "--k", "60", "--variant", "lstm"})).code,
            cli::kExitData);  // fewer examples per class than folds
}

TEST_F(CliTest, DivergenceExitsThree) {
  const CliResult r = run(small({"train", "--data", corpus(), "--model", path("div.json"), "--lr", "1e300"}));
  EXPECT_EQ(r.code, cli::kExitDiverged) << r.err;
  EXPECT_NE(r.err.find("epoch"), std::string::npos);
}

TEST_F(CliTest, EveryRunPrintsSeedAndDigest) {
  const CliResult r = run({"synthesize", "--out", path("s.jsonl"), "--n", "30"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(seed_line(r.err).find("seed=42 config_digest="), std::string::npos) << r.err;
  const CliResult other = run({"synthesize", "--out", path("s.jsonl"), "--n", "31"});
  EXPECT_NE(seed_line(r.err), seed_line(other.err));
}

TEST_F(CliTest, SeedPrecedenceEnvConfigFlag) {
  setenv("RUMORLENS_SEED", "7", 1);
  EXPECT_NE(seed_line(run({"synthesize", "--out", path("s.jsonl")}).err).find("seed=7 "), std::string::npos);
  std::ofstream(path("seed.json")) << R"({"seed": 8, "n": 40})";
  EXPECT_NE(seed_line(run({"synthesize", "--out", path("s.jsonl"), "--config", path("seed.json")}).err).find("seed=8 "),
            std::string::npos);
  EXPECT_NE(seed_line(run({"synthesize", "--out", path("s.jsonl"), "--config", path("seed.json"), "--seed", "9"}).err)
                .find("seed=9 "),
            std::string::npos);
  setenv("RUMORLENS_SEED", "x", 1);
  EXPECT_EQ(run({"synthesize", "--out", path("s.jsonl")}).code, cli::kExitUsage);
}

TEST_F(CliTest, ConfigFileValuesAndFlagsOverride) {
  std::ofstream(path("cfg.json")) << R"({"n": 24, "signal": 1.0})";
  const CliResult from_file = run({"synthesize", "--out", path("cfg.jsonl"), "--config", path("cfg.json")});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_NE(from_file.out.find("wrote 24 records"), std::string::npos);
  const CliResult overridden = run({"synthesize", "--out", path("cfg.jsonl"), "--config", path("cfg.json"), "--n", "26"});
  EXPECT_NE(overridden.out.find("wrote 26 records"), std::string::npos);

  std::ofstream(path("unknown.json")) << R"({"colour": "blue"})";
  EXPECT_EQ(run({"synthesize", "--out", path("x.jsonl"), "--config", path("unknown.json")}).code, cli::kExitUsage);
  std::ofstream(path("notjson.json")) << "{";
  EXPECT_EQ(run({"synthesize", "--out", path("x.jsonl"), "--config", path("notjson.json")}).code, cli::kExitUsage);
  std::ofstream(path("badvalue.json")) << R"({"n": "many"})";
  EXPECT_EQ(run({"synthesize", "--out", path("x.jsonl"), "--config", path("badvalue.json")}).code, cli::kExitUsage);
}

TEST_F(CliTest, GridConfigAcceptsLists) {
  std::ofstream(path("grid.json")) << R"({"lr": [0.1, 0.05], "epochs": 1, "batch-size": 16, "activation": "relu",
                                         "variant": "lstm", "k": 2, "embed-dim": 4, "hidden": 4})";
  const CliResult r = run({"grid-search", "--data", corpus(), "--config", path("grid.json"), "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("grid of 2 combinations"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("rank,variant,batch_size"), std::string::npos);
}

TEST_F(CliTest, TrainThenPredict) {
  const CliResult t = run(small({"train", "--data", corpus(), "--model", path("model.json"), "--variant", "lstm_cnn"}));
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.err.find("epoch 2/2 loss"), std::string::npos);
  const CliResult p = run({"predict", "--data", corpus(), "--model", path("model.json")});
  ASSERT_EQ(p.code, 0) << p.err;
  std::istringstream lines(p.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "id,probability,prediction");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 80u);
}

TEST_F(CliTest, CrossValidateTablesAndDeterminism) {
  const auto args = small({"cross-validate", "--data", corpus(), "--k", "4", "--variant", "all", "--out",
                           path("results.json")});
  const CliResult a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  for (const char* s : {"## LSTM\n", "## LSTMDrop\n", "## LSTM-CNN\n", "Fold", "mean", "Technique"}) {
    EXPECT_NE(a.out.find(s), std::string::npos) << s;
  }
  const CliResult b = run(args);
  EXPECT_EQ(a.out, b.out);

  const ResultsDocument doc = load_results(path("results.json"));
  EXPECT_EQ(doc.results.size(), 3u);
  EXPECT_EQ(doc.config.at("command"), "cross-validate");
  EXPECT_EQ(doc.config.at("k"), "4");

  const CliResult r1 = run({"report", "--in", path("results.json"), "--format", "csv"});
  const CliResult r2 = run({"report", "--in", path("results.json"), "--format", "csv"});
  ASSERT_EQ(r1.code, 0);
  EXPECT_EQ(r1.out, r2.out);
  EXPECT_EQ(r1.out.rfind("technique,acc,pre,rec,f_m\n", 0), 0u);
}

TEST_F(CliTest, WorkersDoNotChangeResults) {
  const auto base = small({"cross-validate", "--data", corpus(), "--k", "3", "--variant", "lstm_dropout"});
  auto parallel = base;
  parallel.insert(parallel.end(), {"--workers", "3"});
  EXPECT_EQ(run(base).out, run(parallel).out);
}
