#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rumorlens/model.hpp"
#include "rumorlens/tensor.hpp"

namespace rumorlens {

class Rng;

/// Values searched by the grid. conv_activation and dropout_rate override
/// the matching ModelConfig fields when a model is built for a run.
struct Hyperparams {
  std::size_t batch_size = 32;
  std::size_t epochs = 5;
  double learning_rate = 0.1;
  Activation conv_activation = Activation::kRelu;
  double dropout_rate = 0.2;

  void validate() const;
  /// `config` with conv_activation and dropout_rate taken from here.
  ModelConfig apply_to(ModelConfig config) const;

  bool operator==(const Hyperparams&) const = default;
};

/// Called after every epoch with the 1-based epoch number and the mean loss.
using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

struct TrainingHistory {
  std::vector<double> epoch_loss;
};

/// Minibatch SGD. Each epoch visits the examples in an order shuffled by
/// `rng`; the last partial batch is kept. The model is left in train mode.
TrainingHistory fit(Model& model, std::span<const EncodedExample> examples, const Hyperparams& hyper,
                    Rng& rng, const EpochCallback& on_epoch = {});

/// 0/1 predictions at the 0.5 threshold.
std::vector<int> predict_labels(const Model& model, std::span<const EncodedExample> examples);

/// Fraction of examples classified correctly, in [0, 1].
double accuracy(const Model& model, std::span<const EncodedExample> examples);

}  // namespace rumorlens
