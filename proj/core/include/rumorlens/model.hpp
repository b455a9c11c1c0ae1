#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rumorlens/layers.hpp"
#include "rumorlens/tensor.hpp"
#include "rumorlens/text.hpp"

namespace rumorlens {

class Rng;

enum class Variant { kLstm, kLstmDropout, kLstmCnn };

/// "lstm", "lstm_dropout", "lstm_cnn".
std::string to_string(Variant variant);
Variant parse_variant(const std::string& name);
/// Row label used in reports: "LSTM", "LSTMDrop", "LSTM-CNN".
std::string display_name(Variant variant);

inline constexpr Variant kAllVariants[] = {Variant::kLstm, Variant::kLstmDropout, Variant::kLstmCnn};

struct ModelConfig {
  Variant variant = Variant::kLstm;
  std::size_t vocab_size = 2;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t embed_dim = 32;
  std::size_t hidden = 64;
  double dropout_rate = 0.2;  // only lstm_dropout uses it
  std::size_t n_filters = 32;
  std::size_t kernel_width = 3;
  std::size_t pool = 2;
  Activation conv_activation = Activation::kRelu;
  std::uint64_t seed = 42;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  /// Steps the LSTM unrolls over: max_len, or floor((max_len - k + 1) / pool)
  /// for lstm_cnn.
  std::size_t lstm_steps() const;
  std::size_t lstm_input_dim() const;
  /// Dropout rate actually applied (0 unless variant is lstm_dropout).
  double effective_dropout() const;

  bool operator==(const ModelConfig&) const = default;
};

/// The three architectures share one parameter layout:
///   lstm:          embed -> LSTM -> head
///   lstm_dropout:  embed -> dropout -> LSTM -> head
///   lstm_cnn:      embed -> conv1d -> maxpool -> LSTM -> head
struct Model {
  ModelConfig config;
  EmbeddingLayer embedding;
  std::optional<Conv1dLayer> conv;
  LstmLayer lstm;
  DenseHead head;
  Mode mode = Mode::kTrain;

  /// Every parameter block with a stable name ("embedding.table",
  /// "conv.kernel", "lstm.W_i", ..., "head.b"), in a fixed order.
  std::vector<std::pair<std::string, Matrix*>> named_parameters();
  std::vector<std::pair<std::string, const Matrix*>> named_parameters() const;
};

/// Gradients laid out exactly like Model parameters.
struct ModelGradients {
  Matrix embedding;
  std::optional<Conv1dGradients> conv;
  LstmGradients lstm;
  DenseHeadGradients head;

  static ModelGradients zeros_like(const Model& model);
  /// Same names and order as Model::named_parameters.
  std::vector<std::pair<std::string, const Matrix*>> named() const;
};

/// Validates the config and initializes every layer from config.seed.
Model build_model(const ModelConfig& config);

/// Probability of the rumor class for each example. Dropout is active only
/// when model.mode is kTrain, and then draws its masks from `rng`.
std::vector<double> forward(const Model& model, std::span<const EncodedExample> batch, Rng& rng);
/// Eval-mode forward; never touches a generator.
std::vector<double> predict(const Model& model, std::span<const EncodedExample> batch);

inline constexpr double kLossClamp = 1e-12;
inline constexpr double kDecisionThreshold = 0.5;

struct BceLoss {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dp per example
};

/// Mean binary cross-entropy with p clamped to [1e-12, 1 - 1e-12].
BceLoss bce_loss(std::span<const double> probs, std::span<const int> labels);

struct LossAndGradients {
  double loss = 0.0;
  std::vector<double> probs;
  ModelGradients grads;
};

/// Forward, loss and full backward pass over a batch; gradients are
/// batch means. Uses model.mode to decide whether dropout is active.
LossAndGradients loss_and_gradients(const Model& model, std::span<const EncodedExample> batch,
                                    Rng& rng);

/// One plain SGD step, theta -= lr * grad. Returns the pre-update loss.
/// Throws TrainingDivergedError when the loss is not finite (parameters are
/// then left untouched) or when the update produces a non-finite parameter.
double train_step(Model& model, std::span<const EncodedExample> batch, double learning_rate, Rng& rng);

}  // namespace rumorlens
