#include "rumorlens/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rumorlens/errors.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/text.hpp"

namespace rumorlens {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw DimensionError(message);
}

}  // namespace

// ---- embedding -------------------------------------------------------------

EmbeddingLayer EmbeddingLayer::create(std::size_t vocab_size, std::size_t embed_dim, Rng& rng) {
  EmbeddingLayer layer{init_matrix(vocab_size, embed_dim, InitScheme::kUniformScaled, rng)};
  for (double& v : layer.table.row(kPadIndex)) v = 0.0;
  return layer;
}

Matrix embedding_forward(std::span<const std::uint32_t> indices, const EmbeddingLayer& layer) {
  const std::size_t dim = layer.table.cols();
  Matrix out(indices.size(), dim);
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const std::uint32_t index = indices[t];
    if (index >= layer.table.rows()) {
      throw EncodingError("embedding: index " + std::to_string(index) + " at position " +
                          std::to_string(t) + " exceeds vocabulary size " +
                          std::to_string(layer.table.rows()));
    }
    std::copy_n(layer.table.row(index).data(), dim, out.row(t).data());
  }
  return out;
}

void embedding_backward(std::span<const std::uint32_t> indices, const Matrix& grad_out,
                        Matrix& grad_table) {
  require(grad_out.rows() == indices.size() && grad_out.cols() == grad_table.cols(),
          "embedding_backward: gradient " + grad_out.shape_string() + " does not match " +
              std::to_string(indices.size()) + " positions of width " +
              std::to_string(grad_table.cols()));
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const std::uint32_t index = indices[t];
    if (index == kPadIndex) continue;
    if (index >= grad_table.rows()) {
      throw EncodingError("embedding_backward: index " + std::to_string(index) + " out of range");
    }
    auto dst = grad_table.row(index);
    auto src = grad_out.row(t);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

// ---- LSTM -------------------------------------------------------------------

LstmLayer LstmLayer::create(std::size_t in_dim, std::size_t hidden, Rng& rng) {
  LstmLayer layer;
  for (std::size_t g = 0; g < kGateCount; ++g) {
    layer.w[g] = init_matrix(in_dim, hidden, InitScheme::kUniformScaled, rng);
    layer.u[g] = init_matrix(hidden, hidden, InitScheme::kUniformScaled, rng);
    layer.b[g] = Matrix::zeros(1, hidden);
  }
  layer.b[kForgetGate].fill(1.0);
  return layer;
}

LstmLayer LstmLayer::zeros(std::size_t in_dim, std::size_t hidden) {
  LstmLayer layer;
  for (std::size_t g = 0; g < kGateCount; ++g) {
    layer.w[g] = Matrix::zeros(in_dim, hidden);
    layer.u[g] = Matrix::zeros(hidden, hidden);
    layer.b[g] = Matrix::zeros(1, hidden);
  }
  return layer;
}

LstmGradients LstmGradients::zeros_like(const LstmLayer& layer) {
  LstmGradients grads;
  for (std::size_t g = 0; g < kGateCount; ++g) {
    grads.w[g] = Matrix::zeros(layer.w[g].rows(), layer.w[g].cols());
    grads.u[g] = Matrix::zeros(layer.u[g].rows(), layer.u[g].cols());
    grads.b[g] = Matrix::zeros(1, layer.b[g].cols());
  }
  return grads;
}

LstmForward lstm_forward(const Matrix& x, const LstmLayer& layer) {
  const std::size_t steps = x.rows();
  const std::size_t hidden = layer.hidden();
  require(steps >= 1, "lstm_forward: empty input sequence");
  require(x.cols() == layer.in_dim(), "lstm_forward: input " + x.shape_string() +
                                          " does not match W " + layer.w[0].shape_string());
  for (std::size_t g = 0; g < kGateCount; ++g) {
    require(layer.w[g].rows() == layer.in_dim() && layer.w[g].cols() == hidden &&
                layer.u[g].rows() == hidden && layer.u[g].cols() == hidden &&
                layer.b[g].rows() == 1 && layer.b[g].cols() == hidden,
            "lstm_forward: inconsistent parameter shapes for gate " + std::to_string(g));
  }

  LstmCache cache;
  cache.x = x;
  cache.h = Matrix::zeros(steps + 1, hidden);
  cache.c = Matrix::zeros(steps + 1, hidden);
  cache.tanh_c = Matrix::zeros(steps, hidden);
  for (auto& gate : cache.gates) gate = Matrix::zeros(steps, hidden);

  for (std::size_t t = 0; t < steps; ++t) {
    const auto x_t = x.row(t);
    const auto h_prev = cache.h.row(t);
    for (std::size_t g = 0; g < kGateCount; ++g) {
      auto z = cache.gates[g].row(t);
      std::copy_n(layer.b[g].data().data(), hidden, z.data());
      row_times_matrix_accumulate(z, x_t, layer.w[g]);
      row_times_matrix_accumulate(z, h_prev, layer.u[g]);
      const Activation act = g == kCellCandidate ? Activation::kTanh : Activation::kSigmoid;
      for (double& v : z) v = apply_activation(act, v);
    }
    const auto i = cache.gates[kInputGate].row(t);
    const auto f = cache.gates[kForgetGate].row(t);
    const auto o = cache.gates[kOutputGate].row(t);
    const auto cand = cache.gates[kCellCandidate].row(t);
    const auto c_prev = cache.c.row(t);
    auto c = cache.c.row(t + 1);
    auto h = cache.h.row(t + 1);
    auto tc = cache.tanh_c.row(t);
    for (std::size_t j = 0; j < hidden; ++j) {
      c[j] = f[j] * c_prev[j] + i[j] * cand[j];
      tc[j] = std::tanh(c[j]);
      h[j] = o[j] * tc[j];
    }
  }

  Matrix final_hidden(1, hidden);
  std::copy_n(cache.h.row(steps).data(), hidden, final_hidden.data().data());
  return {std::move(final_hidden), std::move(cache)};
}

Matrix lstm_backward(const LstmLayer& layer, const LstmCache& cache, const Matrix& grad_final_hidden,
                     LstmGradients& grads) {
  const std::size_t steps = cache.x.rows();
  const std::size_t hidden = layer.hidden();
  require(cache.h.rows() == steps + 1 && cache.h.cols() == hidden && cache.x.cols() == layer.in_dim(),
          "lstm_backward: cache does not belong to this layer");
  require(grad_final_hidden.rows() == 1 && grad_final_hidden.cols() == hidden,
          "lstm_backward: gradient " + grad_final_hidden.shape_string() + " is not 1 x " +
              std::to_string(hidden));
  for (std::size_t g = 0; g < kGateCount; ++g) {
    require(grads.w[g].rows() == layer.w[g].rows() && grads.w[g].cols() == hidden &&
                grads.u[g].rows() == hidden && grads.b[g].cols() == hidden,
            "lstm_backward: gradient accumulator shape mismatch");
  }

  // Transposed copies turn the input/recurrent products into axpy loops,
  // which vectorize; a dot-product reduction does not under strict FP.
  std::array<Matrix, kGateCount> w_t;
  std::array<Matrix, kGateCount> u_t;
  for (std::size_t g = 0; g < kGateCount; ++g) {
    w_t[g] = transpose(layer.w[g]);
    u_t[g] = transpose(layer.u[g]);
  }

  Matrix dx = Matrix::zeros(steps, layer.in_dim());
  std::vector<double> dh(grad_final_hidden.data().begin(), grad_final_hidden.data().end());
  std::vector<double> dc_next(hidden, 0.0);
  std::vector<double> dh_prev(hidden);
  std::array<std::vector<double>, kGateCount> dz;
  for (auto& v : dz) v.assign(hidden, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    const auto i = cache.gates[kInputGate].row(t);
    const auto f = cache.gates[kForgetGate].row(t);
    const auto o = cache.gates[kOutputGate].row(t);
    const auto cand = cache.gates[kCellCandidate].row(t);
    const auto tc = cache.tanh_c.row(t);
    const auto c_prev = cache.c.row(t);
    for (std::size_t j = 0; j < hidden; ++j) {
      const double d_o = dh[j] * tc[j];
      const double dc = dc_next[j] + dh[j] * o[j] * (1.0 - tc[j] * tc[j]);
      const double d_i = dc * cand[j];
      const double d_g = dc * i[j];
      const double d_f = dc * c_prev[j];
      dc_next[j] = dc * f[j];
      dz[kInputGate][j] = d_i * i[j] * (1.0 - i[j]);
      dz[kForgetGate][j] = d_f * f[j] * (1.0 - f[j]);
      dz[kOutputGate][j] = d_o * o[j] * (1.0 - o[j]);
      dz[kCellCandidate][j] = d_g * (1.0 - cand[j] * cand[j]);
    }

    const auto x_t = cache.x.row(t);
    const auto h_prev = cache.h.row(t);
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (std::size_t g = 0; g < kGateCount; ++g) {
      outer_accumulate(grads.w[g], x_t, dz[g]);
      outer_accumulate(grads.u[g], h_prev, dz[g]);
      auto db = grads.b[g].data();
      for (std::size_t j = 0; j < hidden; ++j) db[j] += dz[g][j];
      row_times_matrix_accumulate(dx.row(t), dz[g], w_t[g]);
      row_times_matrix_accumulate(dh_prev, dz[g], u_t[g]);
    }
    dh.swap(dh_prev);
  }
  return dx;
}

// ---- convolution -----------------------------------------------------------

Conv1dLayer Conv1dLayer::create(std::size_t in_dim, std::size_t n_filters, std::size_t kernel_width,
                                Activation activation, Rng& rng) {
  if (kernel_width < 1 || n_filters < 1 || in_dim < 1) {
    throw ConfigError("conv1d: kernel_width, n_filters and in_dim must all be >= 1");
  }
  if (activation != Activation::kRelu && activation != Activation::kTanh) {
    throw ConfigError("conv1d: activation must be relu or tanh, got " + to_string(activation));
  }
  Conv1dLayer layer;
  layer.kernel_width = kernel_width;
  layer.activation = activation;
  layer.kernel = init_matrix(kernel_width * in_dim, n_filters, InitScheme::kUniformScaled, rng);
  layer.bias = Matrix::zeros(1, n_filters);
  return layer;
}

Matrix Conv1dLayer::filter(std::size_t f) const {
  const std::size_t dim = in_dim();
  Matrix out(kernel_width, dim);
  for (std::size_t j = 0; j < kernel_width; ++j)
    for (std::size_t c = 0; c < dim; ++c) out(j, c) = kernel(j * dim + c, f);
  return out;
}

void Conv1dLayer::set_filter(std::size_t f, const Matrix& weights) {
  const std::size_t dim = in_dim();
  require(weights.rows() == kernel_width && weights.cols() == dim && f < n_filters(),
          "conv1d: filter " + weights.shape_string() + " does not fit the layer");
  for (std::size_t j = 0; j < kernel_width; ++j)
    for (std::size_t c = 0; c < dim; ++c) kernel(j * dim + c, f) = weights(j, c);
}

Conv1dGradients Conv1dGradients::zeros_like(const Conv1dLayer& layer) {
  return {Matrix::zeros(layer.kernel.rows(), layer.kernel.cols()),
          Matrix::zeros(1, layer.bias.cols())};
}

Conv1dForward conv1d_forward(const Matrix& x, const Conv1dLayer& layer) {
  const std::size_t k = layer.kernel_width;
  const std::size_t dim = layer.in_dim();
  require(x.cols() == dim, "conv1d_forward: input " + x.shape_string() + " has width " +
                               std::to_string(x.cols()) + ", layer expects " + std::to_string(dim));
  if (x.rows() < k) {
    throw SequenceTooShortError("conv1d_forward: sequence of " + std::to_string(x.rows()) +
                                " steps is shorter than kernel width " + std::to_string(k));
  }
  const std::size_t out_rows = x.rows() - k + 1;
  Matrix out(out_rows, layer.n_filters());
  const double* base = x.data().data();
  for (std::size_t t = 0; t < out_rows; ++t) {
    auto row = out.row(t);
    std::copy_n(layer.bias.data().data(), row.size(), row.data());
    row_times_matrix_accumulate(row, std::span<const double>(base + t * dim, k * dim), layer.kernel);
    for (double& v : row) v = apply_activation(layer.activation, v);
  }
  Conv1dCache cache{x, out};
  return {std::move(out), std::move(cache)};
}

Matrix conv1d_backward(const Conv1dLayer& layer, const Conv1dCache& cache, const Matrix& grad_out,
                       Conv1dGradients& grads) {
  const std::size_t k = layer.kernel_width;
  const std::size_t dim = layer.in_dim();
  require(grad_out.rows() == cache.out.rows() && grad_out.cols() == cache.out.cols(),
          "conv1d_backward: gradient " + grad_out.shape_string() + " does not match output " +
              cache.out.shape_string());
  require(grads.kernel.rows() == layer.kernel.rows() && grads.kernel.cols() == layer.kernel.cols(),
          "conv1d_backward: gradient accumulator shape mismatch");

  const Activation deriv =
      layer.activation == Activation::kTanh ? Activation::kTanhDeriv : Activation::kReluDeriv;
  Matrix dx = Matrix::zeros(cache.x.rows(), dim);
  std::vector<double> dz(layer.n_filters());
  const double* x_base = cache.x.data().data();
  double* dx_base = dx.data().data();
  auto db = grads.bias.data();
  const Matrix kernel_t = transpose(layer.kernel);
  for (std::size_t t = 0; t < cache.out.rows(); ++t) {
    const auto out = cache.out.row(t);
    const auto g = grad_out.row(t);
    for (std::size_t f = 0; f < dz.size(); ++f) {
      dz[f] = g[f] * apply_activation(deriv, out[f]);
      db[f] += dz[f];
    }
    outer_accumulate(grads.kernel, std::span<const double>(x_base + t * dim, k * dim), dz);
    row_times_matrix_accumulate(std::span<double>(dx_base + t * dim, k * dim), dz, kernel_t);
  }
  return dx;
}

// ---- max pooling -----------------------------------------------------------

MaxPoolForward maxpool1d(const Matrix& x, std::size_t pool) {
  if (pool < 1) throw ConfigError("maxpool1d: pool must be >= 1");
  if (x.rows() < pool) {
    throw SequenceTooShortError("maxpool1d: sequence of " + std::to_string(x.rows()) +
                                " steps is shorter than pool " + std::to_string(pool));
  }
  const std::size_t windows = x.rows() / pool;
  const std::size_t d = x.cols();
  MaxPoolForward result{Matrix(windows, d), std::vector<std::size_t>(windows * d), x.rows()};
  for (std::size_t w = 0; w < windows; ++w) {
    for (std::size_t j = 0; j < d; ++j) {
      std::size_t best = w * pool;
      for (std::size_t r = best + 1; r < (w + 1) * pool; ++r) {
        if (x(r, j) > x(best, j)) best = r;
      }
      result.out(w, j) = x(best, j);
      result.argmax[w * d + j] = best;
    }
  }
  return result;
}

Matrix maxpool1d_backward(const MaxPoolForward& forward, const Matrix& grad_out) {
  require(grad_out.rows() == forward.out.rows() && grad_out.cols() == forward.out.cols(),
          "maxpool1d_backward: gradient " + grad_out.shape_string() + " does not match output " +
              forward.out.shape_string());
  const std::size_t d = grad_out.cols();
  Matrix dx = Matrix::zeros(forward.input_rows, d);
  for (std::size_t w = 0; w < grad_out.rows(); ++w)
    for (std::size_t j = 0; j < d; ++j) dx(forward.argmax[w * d + j], j) += grad_out(w, j);
  return dx;
}

// ---- dropout ---------------------------------------------------------------

DropoutForward dropout(const Matrix& x, const DropoutSpec& spec, Rng& rng) {
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(spec.rate));
  }
  if (spec.mode == Mode::kEval || spec.rate == 0.0) return {x, Matrix()};
  const double keep = 1.0 - spec.rate;
  const double scale_factor = 1.0 / keep;
  DropoutForward result{x, Matrix(x.rows(), x.cols())};
  auto mask = result.mask.data();
  auto out = result.out.data();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = rng.bernoulli(keep) ? scale_factor : 0.0;
    out[i] *= mask[i];
  }
  return result;
}

Matrix dropout_backward(const DropoutForward& forward, const Matrix& grad_out) {
  if (forward.mask.empty()) return grad_out;
  return hadamard(grad_out, forward.mask);
}

// ---- dense sigmoid head ----------------------------------------------------

DenseHead DenseHead::create(std::size_t hidden, Rng& rng) {
  return {init_matrix(hidden, 1, InitScheme::kUniformScaled, rng), Matrix::zeros(1, 1)};
}

DenseHeadGradients DenseHeadGradients::zeros_like(const DenseHead& head) {
  return {Matrix::zeros(head.w.rows(), 1), Matrix::zeros(1, 1)};
}

double dense_sigmoid(const Matrix& h, const DenseHead& head) {
  require(h.rows() == 1 && head.w.cols() == 1 && h.cols() == head.w.rows() &&
              head.b.rows() == 1 && head.b.cols() == 1,
          "dense_sigmoid: h " + h.shape_string() + " incompatible with w " + head.w.shape_string());
  double z = head.b(0, 0);
  for (std::size_t j = 0; j < h.cols(); ++j) z += h(0, j) * head.w(j, 0);
  return apply_activation(Activation::kSigmoid, z);
}

Matrix dense_sigmoid_backward(const Matrix& h, const DenseHead& head, double p, double grad_p,
                              DenseHeadGradients& grads) {
  require(h.rows() == 1 && h.cols() == head.w.rows() && grads.w.rows() == head.w.rows(),
          "dense_sigmoid_backward: shape mismatch");
  const double dz = grad_p * p * (1.0 - p);
  Matrix dh(1, h.cols());
  for (std::size_t j = 0; j < h.cols(); ++j) {
    grads.w(j, 0) += h(0, j) * dz;
    dh(0, j) = head.w(j, 0) * dz;
  }
  grads.b(0, 0) += dz;
  return dh;
}

}  // namespace rumorlens
