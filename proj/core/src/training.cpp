#include "rumorlens/training.hpp"

#include <numeric>
#include <string>

#include "rumorlens/errors.hpp"
#include "rumorlens/rng.hpp"

namespace rumorlens {

void Hyperparams::validate() const {
  if (batch_size < 1) throw ConfigError("invalid hyperparameters: batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("invalid hyperparameters: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("invalid hyperparameters: learning_rate must be > 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("invalid hyperparameters: dropout_rate must lie in [0, 1)");
  }
  if (conv_activation != Activation::kRelu && conv_activation != Activation::kTanh) {
    throw ConfigError("invalid hyperparameters: activation must be relu or tanh");
  }
}

ModelConfig Hyperparams::apply_to(ModelConfig config) const {
  config.conv_activation = conv_activation;
  config.dropout_rate = dropout_rate;
  return config;
}

TrainingHistory fit(Model& model, std::span<const EncodedExample> examples, const Hyperparams& hyper,
                    Rng& rng, const EpochCallback& on_epoch) {
  hyper.validate();
  if (examples.empty()) throw DataError("fit: no training examples");
  model.mode = Mode::kTrain;

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<EncodedExample> batch;
  TrainingHistory history;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double weighted_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(examples[order[k]]);
      try {
        weighted_loss += train_step(model, batch, hyper.learning_rate, rng) *
                         static_cast<double>(batch.size());
      } catch (const TrainingDivergedError& e) {
        throw TrainingDivergedError(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                                        ", batch " + std::to_string(batch_index + 1) + ")",
                                    static_cast<int>(epoch), static_cast<int>(batch_index + 1));
      }
    }
    const double mean_loss = weighted_loss / static_cast<double>(order.size());
    history.epoch_loss.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  return history;
}

std::vector<int> predict_labels(const Model& model, std::span<const EncodedExample> examples) {
  const std::vector<double> probs = predict(model, examples);
  std::vector<int> labels(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) labels[k] = probs[k] >= kDecisionThreshold ? 1 : 0;
  return labels;
}

double accuracy(const Model& model, std::span<const EncodedExample> examples) {
  if (examples.empty()) return 0.0;
  const std::vector<int> labels = predict_labels(model, examples);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) correct += labels[k] == examples[k].label;
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace rumorlens
