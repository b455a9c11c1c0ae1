#include "rumorlens/model.hpp"

#include <algorithm>
#include <cmath>

#include "rumorlens/errors.hpp"
#include "rumorlens/rng.hpp"

namespace rumorlens {

namespace {

constexpr const char* kGateSuffix[kGateCount] = {"i", "f", "o", "g"};

// Per-example activations kept for the backward pass.
struct Trace {
  Matrix embedded;
  DropoutForward dropped;
  std::optional<Conv1dForward> conv;
  std::optional<MaxPoolForward> pooled;
  LstmForward lstm;
  double prob = 0.0;
};

Trace trace_forward(const Model& model, const EncodedExample& example, Mode mode, Rng& rng) {
  const ModelConfig& config = model.config;
  if (example.indices.size() != config.max_len) {
    throw DimensionError("forward: example '" + example.id + "' has " +
                         std::to_string(example.indices.size()) + " indices, model expects " +
                         std::to_string(config.max_len));
  }
  Trace trace;
  trace.embedded = embedding_forward(example.indices, model.embedding);
  const Matrix* lstm_input = &trace.embedded;

  if (config.variant == Variant::kLstmDropout) {
    trace.dropped = dropout(trace.embedded, {config.effective_dropout(), mode}, rng);
    lstm_input = &trace.dropped.out;
  } else if (config.variant == Variant::kLstmCnn) {
    trace.conv = conv1d_forward(trace.embedded, *model.conv);
    trace.pooled = maxpool1d(trace.conv->out, config.pool);
    lstm_input = &trace.pooled->out;
  }

  trace.lstm = lstm_forward(*lstm_input, model.lstm);
  trace.prob = dense_sigmoid(trace.lstm.final_hidden, model.head);
  return trace;
}

void trace_backward(const Model& model, const EncodedExample& example, const Trace& trace,
                    double grad_p, ModelGradients& grads) {
  const Matrix d_hidden =
      dense_sigmoid_backward(trace.lstm.final_hidden, model.head, trace.prob, grad_p, grads.head);
  Matrix d_input = lstm_backward(model.lstm, trace.lstm.cache, d_hidden, grads.lstm);

  switch (model.config.variant) {
    case Variant::kLstm:
      break;
    case Variant::kLstmDropout:
      d_input = dropout_backward(trace.dropped, d_input);
      break;
    case Variant::kLstmCnn: {
      const Matrix d_conv = maxpool1d_backward(*trace.pooled, d_input);
      d_input = conv1d_backward(*model.conv, trace.conv->cache, d_conv, *grads.conv);
      break;
    }
  }
  embedding_backward(example.indices, d_input, grads.embedding);
}

template <typename MatrixPtr, typename Self>
std::vector<std::pair<std::string, MatrixPtr>> collect(Self& model) {
  std::vector<std::pair<std::string, MatrixPtr>> out;
  out.emplace_back("embedding.table", &model.embedding.table);
  if (model.conv) {
    out.emplace_back("conv.kernel", &model.conv->kernel);
    out.emplace_back("conv.bias", &model.conv->bias);
  }
  for (std::size_t g = 0; g < kGateCount; ++g) {
    out.emplace_back(std::string("lstm.W_") + kGateSuffix[g], &model.lstm.w[g]);
    out.emplace_back(std::string("lstm.U_") + kGateSuffix[g], &model.lstm.u[g]);
    out.emplace_back(std::string("lstm.b_") + kGateSuffix[g], &model.lstm.b[g]);
  }
  out.emplace_back("head.w", &model.head.w);
  out.emplace_back("head.b", &model.head.b);
  return out;
}

}  // namespace

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::kLstm: return "lstm";
    case Variant::kLstmDropout: return "lstm_dropout";
    case Variant::kLstmCnn: return "lstm_cnn";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : kAllVariants) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "' (expected lstm, lstm_dropout or lstm_cnn)");
}

std::string display_name(Variant variant) {
  switch (variant) {
    case Variant::kLstm: return "LSTM";
    case Variant::kLstmDropout: return "LSTMDrop";
    case Variant::kLstmCnn: return "LSTM-CNN";
  }
  return "?";
}

void ModelConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError("invalid model config: " + what); };
  if (vocab_size < 2) fail("vocab_size must be >= 2 (PAD and OOV are reserved)");
  if (max_len < 1) fail("max_len must be >= 1");
  if (embed_dim < 1) fail("embed_dim must be >= 1");
  if (hidden < 1) fail("hidden must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
  if (variant == Variant::kLstmCnn) {
    if (n_filters < 1) fail("n_filters must be >= 1");
    if (kernel_width < 1) fail("kernel_width must be >= 1");
    if (pool < 1) fail("pool must be >= 1");
    if (conv_activation != Activation::kRelu && conv_activation != Activation::kTanh) {
      fail("conv_activation must be relu or tanh");
    }
    if (max_len < kernel_width) {
      fail("max_len (" + std::to_string(max_len) + ") < kernel_width (" +
           std::to_string(kernel_width) + ")");
    }
    if (max_len - kernel_width + 1 < pool) {
      fail("max_len - kernel_width + 1 (" + std::to_string(max_len - kernel_width + 1) +
           ") < pool (" + std::to_string(pool) + ")");
    }
  }
}

std::size_t ModelConfig::lstm_steps() const {
  if (variant != Variant::kLstmCnn) return max_len;
  return (max_len - kernel_width + 1) / pool;
}

std::size_t ModelConfig::lstm_input_dim() const {
  return variant == Variant::kLstmCnn ? n_filters : embed_dim;
}

double ModelConfig::effective_dropout() const {
  return variant == Variant::kLstmDropout ? dropout_rate : 0.0;
}

std::vector<std::pair<std::string, Matrix*>> Model::named_parameters() {
  return collect<Matrix*>(*this);
}

std::vector<std::pair<std::string, const Matrix*>> Model::named_parameters() const {
  return collect<const Matrix*>(*this);
}

ModelGradients ModelGradients::zeros_like(const Model& model) {
  ModelGradients grads;
  grads.embedding = Matrix::zeros(model.embedding.table.rows(), model.embedding.table.cols());
  if (model.conv) grads.conv = Conv1dGradients::zeros_like(*model.conv);
  grads.lstm = LstmGradients::zeros_like(model.lstm);
  grads.head = DenseHeadGradients::zeros_like(model.head);
  return grads;
}

std::vector<std::pair<std::string, const Matrix*>> ModelGradients::named() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  out.emplace_back("embedding.table", &embedding);
  if (conv) {
    out.emplace_back("conv.kernel", &conv->kernel);
    out.emplace_back("conv.bias", &conv->bias);
  }
  for (std::size_t g = 0; g < kGateCount; ++g) {
    out.emplace_back(std::string("lstm.W_") + kGateSuffix[g], &lstm.w[g]);
    out.emplace_back(std::string("lstm.U_") + kGateSuffix[g], &lstm.u[g]);
    out.emplace_back(std::string("lstm.b_") + kGateSuffix[g], &lstm.b[g]);
  }
  out.emplace_back("head.w", &head.w);
  out.emplace_back("head.b", &head.b);
  return out;
}

Model build_model(const ModelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Model model;
  model.config = config;
  model.embedding = EmbeddingLayer::create(config.vocab_size, config.embed_dim, rng);
  if (config.variant == Variant::kLstmCnn) {
    model.conv = Conv1dLayer::create(config.embed_dim, config.n_filters, config.kernel_width,
                                     config.conv_activation, rng);
  }
  model.lstm = LstmLayer::create(config.lstm_input_dim(), config.hidden, rng);
  model.head = DenseHead::create(config.hidden, rng);
  return model;
}

std::vector<double> forward(const Model& model, std::span<const EncodedExample> batch, Rng& rng) {
  std::vector<double> probs;
  probs.reserve(batch.size());
  for (const auto& example : batch) {
    probs.push_back(trace_forward(model, example, model.mode, rng).prob);
  }
  return probs;
}

std::vector<double> predict(const Model& model, std::span<const EncodedExample> batch) {
  Rng unused(0);
  std::vector<double> probs;
  probs.reserve(batch.size());
  for (const auto& example : batch) {
    probs.push_back(trace_forward(model, example, Mode::kEval, unused).prob);
  }
  return probs;
}

BceLoss bce_loss(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    throw DimensionError("bce_loss: " + std::to_string(probs.size()) + " probabilities vs " +
                         std::to_string(labels.size()) + " labels");
  }
  BceLoss result;
  result.grad.resize(probs.size());
  if (probs.empty()) return result;
  const double n = static_cast<double>(probs.size());
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = std::clamp(probs[k], kLossClamp, 1.0 - kLossClamp);
    const bool positive = labels[k] == 1;
    total += positive ? -std::log(p) : -std::log(1.0 - p);
    result.grad[k] = (positive ? -1.0 / p : 1.0 / (1.0 - p)) / n;
  }
  result.loss = total / n;
  return result;
}

LossAndGradients loss_and_gradients(const Model& model, std::span<const EncodedExample> batch,
                                    Rng& rng) {
  std::vector<Trace> traces;
  traces.reserve(batch.size());
  LossAndGradients result;
  std::vector<int> labels;
  for (const auto& example : batch) {
    traces.push_back(trace_forward(model, example, model.mode, rng));
    result.probs.push_back(traces.back().prob);
    labels.push_back(example.label);
  }
  const BceLoss loss = bce_loss(result.probs, labels);
  result.loss = loss.loss;
  result.grads = ModelGradients::zeros_like(model);
  if (!std::isfinite(result.loss)) return result;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    trace_backward(model, batch[k], traces[k], loss.grad[k], result.grads);
  }
  return result;
}

double train_step(Model& model, std::span<const EncodedExample> batch, double learning_rate, Rng& rng) {
  if (model.mode != Mode::kTrain) throw ConfigError("train_step: model is in eval mode");
  if (!(learning_rate >= 0.0)) throw ConfigError("train_step: learning rate must be >= 0");
  const LossAndGradients step = loss_and_gradients(model, batch, rng);
  if (!std::isfinite(step.loss)) {
    throw TrainingDivergedError("training diverged: loss is " + std::to_string(step.loss), -1, -1);
  }
  const auto params = model.named_parameters();
  const auto grads = step.grads.named();
  for (std::size_t k = 0; k < params.size(); ++k) axpy(*params[k].second, *grads[k].second, -learning_rate);
  for (const auto& [name, param] : params) {
    if (!all_finite(*param)) {
      throw TrainingDivergedError("training diverged: parameter " + name + " is not finite", -1, -1);
    }
  }
  return step.loss;
}

}  // namespace rumorlens
