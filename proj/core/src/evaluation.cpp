#include "rumorlens/evaluation.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "parallel.hpp"
#include "rumorlens/errors.hpp"
#include "rumorlens/rng.hpp"

namespace rumorlens {

namespace {

struct Ratio {
  double value = 0.0;
  bool undefined = false;
};

Ratio percent(std::size_t num, std::size_t den) {
  if (den == 0) return {0.0, true};
  return {100.0 * static_cast<double>(num) / static_cast<double>(den), false};
}

Ratio harmonic(const Ratio& p, const Ratio& r) {
  if (p.undefined || r.undefined || p.value + r.value == 0.0) return {0.0, true};
  return {2.0 * p.value * r.value / (p.value + r.value), false};
}

}  // namespace

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const bool pred = predictions[k] == 1;
    const bool truth = labels[k] == 1;
    if (pred && truth) ++cm.tp;
    else if (pred) ++cm.fp;
    else if (truth) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyEvaluationError("compute_metrics: confusion matrix is empty");

  const Ratio precision_pos = percent(cm.tp, cm.tp + cm.fp);
  const Ratio recall_pos = percent(cm.tp, cm.tp + cm.fn);
  const Ratio f1_pos = harmonic(precision_pos, recall_pos);
  const Ratio precision_neg = percent(cm.tn, cm.tn + cm.fn);
  const Ratio recall_neg = percent(cm.tn, cm.tn + cm.fp);
  const Ratio f1_neg = harmonic(precision_neg, recall_neg);

  MetricsReport report;
  report.accuracy = percent(cm.tp + cm.tn, cm.total()).value;
  report.precision_pos = precision_pos.value;
  report.recall_pos = recall_pos.value;
  report.f1_pos = f1_pos.value;
  report.precision_pos_undefined = precision_pos.undefined;
  report.recall_pos_undefined = recall_pos.undefined;
  report.f1_pos_undefined = f1_pos.undefined;
  report.precision_macro = (precision_pos.value + precision_neg.value) / 2.0;
  report.recall_macro = (recall_pos.value + recall_neg.value) / 2.0;
  report.f1_macro = (f1_pos.value + f1_neg.value) / 2.0;
  report.macro_undefined = precision_pos.undefined || precision_neg.undefined ||
                           recall_pos.undefined || recall_neg.undefined || f1_pos.undefined ||
                           f1_neg.undefined;
  return report;
}

MetricsReport mean_metrics(std::span<const MetricsReport> reports) {
  MetricsReport mean;
  if (reports.empty()) return mean;
  for (const auto& r : reports) {
    mean.accuracy += r.accuracy;
    mean.precision_pos += r.precision_pos;
    mean.recall_pos += r.recall_pos;
    mean.f1_pos += r.f1_pos;
    mean.precision_macro += r.precision_macro;
    mean.recall_macro += r.recall_macro;
    mean.f1_macro += r.f1_macro;
    mean.precision_pos_undefined |= r.precision_pos_undefined;
    mean.recall_pos_undefined |= r.recall_pos_undefined;
    mean.f1_pos_undefined |= r.f1_pos_undefined;
    mean.macro_undefined |= r.macro_undefined;
  }
  const double n = static_cast<double>(reports.size());
  for (double* v : {&mean.accuracy, &mean.precision_pos, &mean.recall_pos, &mean.f1_pos,
                    &mean.precision_macro, &mean.recall_macro, &mean.f1_macro}) {
    *v /= n;
  }
  return mean;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2, got " + std::to_string(k));
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("stratified_kfold: label " + std::to_string(labels[i]) + " at index " +
                      std::to_string(i) + " is not binary");
    }
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw InsufficientClassSizeError("stratified_kfold: class " + std::to_string(c) + " has " +
                                       std::to_string(by_class[c].size()) +
                                       " examples, fewer than k = " + std::to_string(k));
    }
  }

  FoldPlan plan{k, std::vector<std::size_t>(labels.size(), 0), seed};
  Rng rng(seed);
  std::size_t position = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) plan.fold_of[idx] = position++ % k;
  }
  return plan;
}

FoldPlan stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (const auto& e : dataset.examples) labels.push_back(e.label);
  return stratified_kfold(labels, k, seed);
}

FoldPlan event_folds(const Dataset& dataset) {
  std::set<std::string> events;
  for (const auto& e : dataset.examples) events.insert(e.event);
  if (events.size() < 2) throw DataError("event folds need at least two distinct events");
  const std::vector<std::string> ordered(events.begin(), events.end());
  FoldPlan plan{ordered.size(), std::vector<std::size_t>(dataset.size()), 0};
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    plan.fold_of[i] = static_cast<std::size_t>(
        std::lower_bound(ordered.begin(), ordered.end(), dataset.examples[i].event) - ordered.begin());
  }
  return plan;
}

CvResult cross_validate_with(const FoldPlan& plan, std::span<const int> labels, const FoldRunner& runner,
                             std::size_t workers) {
  if (plan.fold_of.size() != labels.size()) {
    throw DimensionError("cross_validate: fold plan covers " + std::to_string(plan.fold_of.size()) +
                         " examples, dataset has " + std::to_string(labels.size()));
  }
  CvResult result;
  result.folds.resize(plan.k);
  detail::parallel_for(plan.k, workers, [&](std::size_t fold) {
    const std::vector<std::size_t> test = plan.test_indices(fold);
    const std::vector<std::size_t> train = plan.train_indices(fold);
    const std::vector<int> predictions = runner(train, test, fold);
    std::vector<int> truth;
    truth.reserve(test.size());
    for (std::size_t idx : test) truth.push_back(labels[idx]);
    FoldResult& out = result.folds[fold];
    out.fold = fold;
    out.train_size = train.size();
    out.test_size = test.size();
    out.confusion = confusion(predictions, truth);
    out.metrics = compute_metrics(out.confusion);
  });
  std::vector<MetricsReport> reports;
  for (const auto& f : result.folds) reports.push_back(f.metrics);
  result.mean = mean_metrics(reports);
  return result;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) { return seed ^ static_cast<std::uint64_t>(fold); }

CvResult cross_validate(const ModelConfig& config, const Hyperparams& hyper, const Dataset& dataset,
                        std::size_t k, std::uint64_t seed, const CvOptions& options) {
  hyper.validate();
  ModelConfig base = hyper.apply_to(config);
  base.max_len = dataset.options.max_len;
  base.vocab_size = dataset.vocab.size();
  base.validate();

  const FoldPlan plan = options.by_event ? event_folds(dataset) : stratified_kfold(dataset, k, seed);
  std::vector<int> labels;
  for (const auto& e : dataset.examples) labels.push_back(e.label);

  const FoldRunner runner = [&](std::span<const std::size_t> train, std::span<const std::size_t> test,
                                std::size_t fold) {
    const Dataset* source = &dataset;
    Dataset fold_data;
    if (options.per_fold_vocab) {
      std::vector<Tokens> corpus;
      corpus.reserve(train.size());
      for (std::size_t idx : train) corpus.push_back(dataset.tokens[idx]);
      fold_data = reencode(dataset, build_vocabulary(corpus, dataset.options.min_count,
                                                     dataset.options.max_vocab));
      source = &fold_data;
    }
    std::vector<EncodedExample> train_set;
    train_set.reserve(train.size());
    for (std::size_t idx : train) train_set.push_back(source->examples[idx]);
    std::vector<EncodedExample> test_set;
    test_set.reserve(test.size());
    for (std::size_t idx : test) test_set.push_back(source->examples[idx]);

    ModelConfig fold_config = base;
    fold_config.vocab_size = source->vocab.size();
    fold_config.seed = fold_seed(seed, fold);
    Model model = build_model(fold_config);
    std::uint64_t mix = fold_config.seed;
    Rng rng(splitmix64(mix));
    EpochCallback on_epoch;
    if (options.on_epoch) {
      on_epoch = [&, fold](std::size_t epoch, double loss) { options.on_epoch(fold, epoch, loss); };
    }
    try {
      fit(model, train_set, hyper, rng, on_epoch);
    } catch (const TrainingDivergedError& e) {
      throw TrainingDivergedError("fold " + std::to_string(fold) + ": " + e.what(), e.epoch(), e.batch());
    }
    return predict_labels(model, test_set);
  };
  return cross_validate_with(plan, labels, runner, options.workers);
}

}  // namespace rumorlens
