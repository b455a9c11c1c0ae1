#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "rumorlens/dataset_io.hpp"
#include "rumorlens/errors.hpp"
#include "rumorlens/experiments.hpp"
#include "rumorlens/rng.hpp"

using namespace rumorlens;

namespace {

ExperimentResult stored_row(Variant v, double acc, double pre, double rec, double f1) {
  ExperimentResult r;
  r.variant = v;
  r.mean.accuracy = acc;
  r.mean.precision_pos = pre;
  r.mean.recall_pos = rec;
  r.mean.f1_pos = f1;
  return r;
}

ModelConfig fast_config() {
  ModelConfig c;
  c.embed_dim = 6;
  c.hidden = 6;
  c.n_filters = 3;
  return c;
}

GridSpec single(Variant v) {
  GridSpec g;
  g.variants = {v};
  g.batch_sizes = {16};
  g.epochs = {1};
  g.learning_rates = {0.1};
  g.activations = {Activation::kRelu};
  g.dropout_rates = {0.2};
  return g;
}

}  // namespace

TEST(GridSpec, DefaultCandidates) {
  const GridSpec g;
  EXPECT_EQ(g.batch_sizes, (std::vector<std::size_t>{16, 32, 64}));
  EXPECT_EQ(g.epochs, (std::vector<std::size_t>{5, 10, 20}));
  EXPECT_EQ(g.learning_rates, (std::vector<double>{0.1, 0.01, 0.001}));
  EXPECT_EQ(g.dropout_rates, (std::vector<double>{0.2}));
  EXPECT_EQ(g.size(), 3u * 3 * 3 * 3 * 2 * 1);
  EXPECT_EQ(g.combinations().size(), g.size());
}

TEST(GridSpec, ProductCardinalityAndDistinctness) {
  GridSpec g = single(Variant::kLstm);
  g.variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
  g.learning_rates = {0.1, 0.01};
  g.epochs = {5};
  const auto combos = g.combinations();
  ASSERT_EQ(combos.size(), 6u);
  std::set<std::pair<int, double>> seen;
  for (const auto& c : combos) seen.insert({static_cast<int>(c.variant), c.hyper.learning_rate});
  EXPECT_EQ(seen.size(), 6u);
}

TEST(GridSpec, Validation) {
  GridSpec g;
  g.epochs.clear();
  EXPECT_THROW(g.validate(), ConfigError);
  g = GridSpec{};
  g.learning_rates = {0.1, -1.0};
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Ranking, TieBreakChain) {
  std::vector<ExperimentResult> rs(5);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    rs[i].combination_index = i;
    rs[i].mean.accuracy = 80.0;
  }
  rs[0].hyper.epochs = 10;
  rs[1].hyper.epochs = 5, rs[1].hyper.batch_size = 64;
  rs[2].hyper.epochs = 5, rs[2].hyper.batch_size = 16, rs[2].variant = Variant::kLstmDropout;
  rs[3].hyper.epochs = 5, rs[3].hyper.batch_size = 16, rs[3].variant = Variant::kLstm;
  rs[4].mean.accuracy = 80.5;
  rank_results(rs, SelectionMetric::kAccuracy);
  std::vector<std::size_t> order;
  for (const auto& r : rs) order.push_back(r.combination_index);
  EXPECT_EQ(order, (std::vector<std::size_t>{4, 3, 2, 1, 0}));
  for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_EQ(rs[i].rank, i + 1);
}

TEST(Ranking, TotalOrderUnderShuffle) {
  Rng rng(3);
  std::vector<ExperimentResult> rs(40);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    rs[i].combination_index = i;
    rs[i].variant = kAllVariants[rng.below(3)];
    rs[i].hyper.epochs = 5 * (1 + rng.below(2));
    rs[i].hyper.batch_size = 16 * (1 + rng.below(2));
    rs[i].hyper.learning_rate = rng.bernoulli(0.5) ? 0.1 : 0.01;
    rs[i].mean.accuracy = 50.0 + static_cast<double>(rng.below(3));
    rs[i].mean.f1_pos = static_cast<double>(rng.below(4));
    if (rng.bernoulli(0.1)) rs[i].status = RunStatus::kFailed;
  }
  for (SelectionMetric metric : {SelectionMetric::kAccuracy, SelectionMetric::kF1Pos}) {
    auto a = rs;
    rank_results(a, metric);
    for (int t = 0; t < 10; ++t) {
      auto b = rs;
      rng.shuffle(std::span<ExperimentResult>(b));
      rank_results(b, metric);
      for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].combination_index, b[i].combination_index);
        ASSERT_EQ(a[i].rank, b[i].rank);
      }
    }
    bool failed_seen = false;
    for (const auto& r : a) {
      if (r.status == RunStatus::kFailed) {
        failed_seen = true;
        EXPECT_EQ(r.rank, 0u);
      } else {
        EXPECT_FALSE(failed_seen) << "ranked result after a failed one";
      }
    }
  }
}

TEST(GridSearch, SingletonGridGivesRankOne) {
  const Dataset data = synthesize_corpus(40, 0.9, 1, {8});
  const auto results = grid_search(single(Variant::kLstm), fast_config(), data, 2, 42);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].rank, 1u);
  EXPECT_EQ(results[0].status, RunStatus::kOk);
  EXPECT_EQ(results[0].folds.size(), 2u);
  EXPECT_FALSE(results[0].completed_at.empty());
}

TEST(GridSearch, EveryCombinationOnceFailuresKept) {
  const Dataset data = synthesize_corpus(40, 0.9, 2, {8});
  GridSpec g = single(Variant::kLstm);
  g.variants = {Variant::kLstm, Variant::kLstmCnn};
  g.learning_rates = {0.1, 1e300};  // the second diverges
  GridOptions options;
  options.workers = 2;
  std::size_t callbacks = 0;
  options.on_result = [&](const ExperimentResult&) { ++callbacks; };
  const auto results = grid_search(g, fast_config(), data, 2, 7, SelectionMetric::kAccuracy, options);
  ASSERT_EQ(results.size(), 4u);
  EXPECT_EQ(callbacks, 4u);
  std::set<std::size_t> indices;
  std::size_t failed = 0;
  for (const auto& r : results) {
    indices.insert(r.combination_index);
    if (r.status == RunStatus::kFailed) {
      ++failed;
      EXPECT_EQ(r.rank, 0u);
      EXPECT_FALSE(r.error.empty());
    }
  }
  EXPECT_EQ(indices.size(), 4u);
  EXPECT_EQ(failed, 2u);
  EXPECT_EQ(results[0].rank, 1u);
  EXPECT_EQ(results[1].rank, 2u);
}

TEST(GridSearch, DeterministicAcrossWorkerCounts) {
  const Dataset data = synthesize_corpus(40, 0.9, 3, {8});
  GridSpec g = single(Variant::kLstm);
  g.variants = {Variant::kLstm, Variant::kLstmDropout};
  GridOptions one, three;
  three.workers = 3;
  const auto a = grid_search(g, fast_config(), data, 2, 5, SelectionMetric::kF1Pos, one);
  const auto b = grid_search(g, fast_config(), data, 2, 5, SelectionMetric::kF1Pos, three);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].combination_index, b[i].combination_index);
    EXPECT_EQ(a[i].mean, b[i].mean);
  }
}

TEST(Report, StoredRowsRenderExactly) {
  EXPECT_EQ(render_row(stored_row(Variant::kLstm, 82.29, 44.35, 40.55, 40.59)), "LSTM  82.29  44.35  40.55  40.59");
  EXPECT_EQ(render_row(stored_row(Variant::kLstmDropout, 73.78, 39.67, 29.71, 30.93)),
            "LSTMDrop  73.78  39.67  29.71  30.93");
  EXPECT_EQ(render_row(stored_row(Variant::kLstmCnn, 80.38, 43.94, 39.53, 39.70)),
            "LSTM-CNN  80.38  43.94  39.53  39.70");
}

TEST(Report, EmptyCsvIsHeaderOnly) {
  EXPECT_EQ(render_report({}, ReportFormat::kCsv), "technique,acc,pre,rec,f_m\n");
  EXPECT_EQ(render_report({}, ReportFormat::kText), "Technique  ACC  PRE  REC  F-M\n");
}

TEST(Report, TextTableIsAligned) {
  const std::vector<ExperimentResult> rows = {stored_row(Variant::kLstm, 82.29, 44.35, 40.55, 40.59),
                                              stored_row(Variant::kLstmCnn, 80.38, 43.94, 39.53, 39.7)};
  EXPECT_EQ(render_report(rows, ReportFormat::kText),
            "Technique    ACC    PRE    REC    F-M\n"
            "LSTM       82.29  44.35  40.55  40.59\n"
            "LSTM-CNN   80.38  43.94  39.53  39.70\n");
  EXPECT_EQ(render_report(rows, ReportFormat::kCsv),
            "technique,acc,pre,rec,f_m\nLSTM,82.29,44.35,40.55,40.59\nLSTM-CNN,80.38,43.94,39.53,39.70\n");
  EXPECT_EQ(render_report(rows, ReportFormat::kText), render_report(rows, ReportFormat::kText));
}

TEST(Report, UndefinedAndFailedCells) {
  ExperimentResult undefined = stored_row(Variant::kLstm, 50, 0, 0, 0);
  undefined.mean.precision_pos_undefined = true;
  undefined.mean.f1_pos_undefined = true;
  ExperimentResult failed = stored_row(Variant::kLstmDropout, 0, 0, 0, 0);
  failed.status = RunStatus::kFailed;
  const std::string text = render_report({undefined, failed}, ReportFormat::kText);
  EXPECT_NE(text.find("0.00*"), std::string::npos);
  EXPECT_NE(text.find("* undefined"), std::string::npos);
  EXPECT_NE(text.find("LSTMDrop       -"), std::string::npos) << text;
  EXPECT_EQ(render_report({failed}, ReportFormat::kCsv), "technique,acc,pre,rec,f_m\nLSTMDrop,-,-,-,-\n");
  EXPECT_THROW(parse_report_format("xml"), ConfigError);
}

TEST(Report, FoldTable) {
  FoldResult f;
  f.metrics = compute_metrics({3, 1, 2, 4});
  const std::vector<FoldResult> folds = {f};
  EXPECT_EQ(render_fold_table(folds, f.metrics, ReportFormat::kCsv),
            "fold,acc,pre,rec,f_m\n1,70.00,75.00,60.00,66.67\nmean,70.00,75.00,60.00,66.67\n");
}

TEST(Results, DocumentRoundTrip) {
  ResultsDocument doc;
  doc.seed = 42;
  doc.k = 3;
  doc.selection = SelectionMetric::kF1Pos;
  doc.config = {{"command", "grid-search"}, {"lr", "0.1"}};
  ExperimentResult r = stored_row(Variant::kLstmCnn, 1.0 / 3.0, 2, 3, 4);
  r.rank = 1;
  r.hyper.learning_rate = 0.01;
  r.hyper.conv_activation = Activation::kTanh;
  FoldResult f;
  f.fold = 0;
  f.train_size = 10;
  f.test_size = 5;
  f.confusion = {1, 2, 1, 1};
  f.metrics = compute_metrics(f.confusion);
  r.folds = {f};
  r.completed_at = "2026-01-01T00:00:00Z";
  ExperimentResult bad = stored_row(Variant::kLstm, 0, 0, 0, 0);
  bad.status = RunStatus::kFailed;
  bad.error = "training diverged";
  doc.results = {r, bad};

  const std::string text = serialize_results(doc);
  const ResultsDocument back = parse_results(text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.k, 3u);
  EXPECT_EQ(back.selection, SelectionMetric::kF1Pos);
  EXPECT_EQ(back.config, doc.config);
  EXPECT_EQ(back.grid, doc.grid);
  ASSERT_EQ(back.results.size(), 2u);
  EXPECT_EQ(back.results[0].mean, r.mean);
  EXPECT_EQ(back.results[0].hyper, r.hyper);
  EXPECT_EQ(back.results[0].folds[0].confusion, f.confusion);
  EXPECT_EQ(back.results[1].status, RunStatus::kFailed);
  EXPECT_EQ(back.results[1].error, "training diverged");
  EXPECT_EQ(serialize_results(back), text);

  const auto path = std::filesystem::temp_directory_path() / "rumorlens_results_test.json";
  save_results(doc, path);
  EXPECT_EQ(serialize_results(load_results(path)), text);
}

TEST(Results, RejectsBadDocuments) {
  EXPECT_THROW(parse_results("{"), DataError);
  EXPECT_THROW(parse_results("{}"), DataError);
  EXPECT_THROW(parse_results(R"({"schema_version": 999})"), UnsupportedVersionError);
}

TEST(Timestamp, IsoUtcShape) {
  const std::string t = utc_timestamp();
  ASSERT_EQ(t.size(), 20u);
  EXPECT_EQ(t[4], '-');
  EXPECT_EQ(t[10], 'T');
  EXPECT_EQ(t.back(), 'Z');
}
