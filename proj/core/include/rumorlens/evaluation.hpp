#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rumorlens/dataset_io.hpp"
#include "rumorlens/model.hpp"
#include "rumorlens/training.hpp"

namespace rumorlens {

/// Outcome counts with rumour (label 1) as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

/// All values are percentages in [0, 100]. A ratio with a zero denominator is
/// reported as 0 and its flag is set. Macro scores average the per-class
/// scores of both classes (macro F1 is the mean of per-class F1), and
/// macro_undefined is set if any per-class score was 0/0.
struct MetricsReport {
  double accuracy = 0.0;
  double precision_pos = 0.0;
  double recall_pos = 0.0;
  double f1_pos = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;

  bool precision_pos_undefined = false;
  bool recall_pos_undefined = false;
  bool f1_pos_undefined = false;
  bool macro_undefined = false;

  bool operator==(const MetricsReport&) const = default;
};

/// Throws EmptyEvaluationError when the matrix is empty.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// Arithmetic mean of every metric; flags are OR-ed.
MetricsReport mean_metrics(std::span<const MetricsReport> reports);

/// Assignment of every example to one of k folds.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;  // example index -> fold id
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;

  bool operator==(const FoldPlan&) const = default;
};

/// Per class, shuffles the example indices with `seed` and deals them
/// round-robin into k folds. The dealing position carries over from one class
/// to the next, so fold sizes also differ by at most one. Throws
/// InsufficientClassSizeError when a class has fewer than k examples.
FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);
FoldPlan stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed);

/// One fold per distinct event tag, in lexicographic event order.
FoldPlan event_folds(const Dataset& dataset);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  ConfusionMatrix confusion;
  MetricsReport metrics;
};

struct CvResult {
  std::vector<FoldResult> folds;
  MetricsReport mean;
};

/// Trains on `train` and returns 0/1 predictions for `test`, in order.
using FoldRunner = std::function<std::vector<int>(std::span<const std::size_t> train,
                                                  std::span<const std::size_t> test, std::size_t fold)>;

/// Runs `runner` on every fold of `plan` (in parallel when workers > 1) and
/// aggregates in fold order.
CvResult cross_validate_with(const FoldPlan& plan, std::span<const int> labels, const FoldRunner& runner,
                             std::size_t workers = 1);

struct CvOptions {
  std::size_t workers = 1;
  /// Rebuild the vocabulary from each fold's training examples only.
  bool per_fold_vocab = false;
  /// Hold out one event per fold instead of stratified k-fold.
  bool by_event = false;
  /// Forwarded to fit() for every fold (called from worker threads).
  std::function<void(std::size_t fold, std::size_t epoch, double loss)> on_epoch;
};

/// Seed used for fold f: seed XOR f.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold);

/// Stratified k-fold CV of a freshly built model per fold. Model shape comes
/// from `config` (vocab_size and max_len are taken from the dataset,
/// conv_activation and dropout_rate from `hyper`, seed from fold_seed).
/// TrainingDivergedError is rethrown with the failing fold in its message.
CvResult cross_validate(const ModelConfig& config, const Hyperparams& hyper, const Dataset& dataset,
                        std::size_t k, std::uint64_t seed, const CvOptions& options = {});

}  // namespace rumorlens
