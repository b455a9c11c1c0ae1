#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rumorlens/dataset_io.hpp"
#include "rumorlens/evaluation.hpp"
#include "rumorlens/model.hpp"
#include "rumorlens/training.hpp"

namespace rumorlens {

/// Candidate values per hyperparameter. The search runs the full Cartesian
/// product variants x batch_sizes x epochs x learning_rates x activations x
/// dropout_rates.
struct GridSpec {
  std::vector<Variant> variants{Variant::kLstm, Variant::kLstmDropout, Variant::kLstmCnn};
  std::vector<std::size_t> batch_sizes{16, 32, 64};
  std::vector<std::size_t> epochs{5, 10, 20};
  std::vector<double> learning_rates{0.1, 0.01, 0.001};
  std::vector<Activation> activations{Activation::kRelu, Activation::kTanh};
  std::vector<double> dropout_rates{0.2};

  /// Throws ConfigError if any list is empty or any combination is invalid.
  void validate() const;
  std::size_t size() const noexcept;

  struct Combination {
    Variant variant;
    Hyperparams hyper;
  };
  /// In a fixed order; the position is the combination index.
  std::vector<Combination> combinations() const;

  bool operator==(const GridSpec&) const = default;
};

enum class SelectionMetric { kAccuracy, kF1Pos };
std::string to_string(SelectionMetric metric);
SelectionMetric parse_selection_metric(const std::string& name);

enum class RunStatus { kOk, kFailed };

struct ExperimentResult {
  std::size_t combination_index = 0;
  std::size_t rank = 0;  // 1-based; 0 for failed runs
  Variant variant = Variant::kLstm;
  Hyperparams hyper;
  RunStatus status = RunStatus::kOk;
  std::string error;
  std::vector<FoldResult> folds;
  MetricsReport mean;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string completed_at;  // ISO-8601 UTC; the only wall-clock fields
};

struct GridOptions {
  std::size_t workers = 1;
  CvOptions cv;  // cv.workers is ignored; parallelism is across combinations
  /// Called once per finished combination (from worker threads).
  std::function<void(const ExperimentResult&)> on_result;
};

/// Cross-validates every combination. Successful runs come first, ranked by
/// the selection metric (descending), then fewer epochs, smaller batch,
/// variant name, learning rate, activation name, dropout rate and
/// combination index. Failed combinations follow in combination order.
std::vector<ExperimentResult> grid_search(const GridSpec& grid, const ModelConfig& base,
                                          const Dataset& dataset, std::size_t k, std::uint64_t seed,
                                          SelectionMetric selection = SelectionMetric::kAccuracy,
                                          const GridOptions& options = {});

/// Sorts and assigns ranks as described for grid_search.
void rank_results(std::vector<ExperimentResult>& results, SelectionMetric selection);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

// ---- persisted results -----------------------------------------------------

inline constexpr int kResultsSchemaVersion = 1;

/// {schema_version, grid, seed, k, selection_metric, config, results}
struct ResultsDocument {
  GridSpec grid;
  std::uint64_t seed = 0;
  std::size_t k = 10;
  SelectionMetric selection = SelectionMetric::kAccuracy;
  /// Fully resolved run configuration, echoed for reproducibility.
  std::map<std::string, std::string> config;
  std::vector<ExperimentResult> results;
};

std::string serialize_results(const ResultsDocument& doc);
ResultsDocument parse_results(std::string_view text);
void save_results(const ResultsDocument& doc, const std::filesystem::path& path);
ResultsDocument load_results(const std::filesystem::path& path);

// ---- reports ---------------------------------------------------------------

enum class ReportFormat { kText, kCsv };
ReportFormat parse_report_format(const std::string& name);

/// "LSTM  82.29  44.35  40.55  40.59": technique then ACC, PRE, REC, F-M
/// (positive-class metrics) with two decimals, separated by two spaces.
std::string render_row(const ExperimentResult& result);

/// Table with columns Technique, ACC, PRE, REC, F-M, one row per result.
/// Text: header plus column-aligned rows (technique left-aligned, numbers
/// right-aligned, two-space gaps). CSV: header "technique,acc,pre,rec,f_m".
/// Failed runs show "-" for every metric.
std::string render_report(const std::vector<ExperimentResult>& results, ReportFormat format);

/// Per-fold table for a single cross-validation run, followed by the mean.
std::string render_fold_table(const std::vector<FoldResult>& folds, const MetricsReport& mean,
                              ReportFormat format);

}  // namespace rumorlens
