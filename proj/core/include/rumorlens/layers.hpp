#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rumorlens/tensor.hpp"

namespace rumorlens {

class Rng;

enum class Mode { kTrain, kEval };

// ---------------------------------------------------------------------------
// Embedding

/// Lookup table of shape (vocab_size x embed_dim). Row 0 is the PAD vector:
/// it stays zero and never receives a gradient.
struct EmbeddingLayer {
  Matrix table;

  static EmbeddingLayer create(std::size_t vocab_size, std::size_t embed_dim, Rng& rng);
};

/// Row t of the result is table[indices[t]].
Matrix embedding_forward(std::span<const std::uint32_t> indices, const EmbeddingLayer& layer);

/// Scatters grad_out rows into grad_table, skipping PAD rows. Repeated
/// indices accumulate.
void embedding_backward(std::span<const std::uint32_t> indices, const Matrix& grad_out,
                        Matrix& grad_table);

// ---------------------------------------------------------------------------
// LSTM

/// Gate order used for every per-gate array below.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCellCandidate = 3 };
inline constexpr std::size_t kGateCount = 4;

/// Forget-gate LSTM without peepholes:
///   i = sig(x W_i + h U_i + b_i)    f = sig(x W_f + h U_f + b_f)
///   o = sig(x W_o + h U_o + b_o)    g = tanh(x W_g + h U_g + b_g)
///   c' = f*c + i*g                  h' = o*tanh(c')
struct LstmLayer {
  std::array<Matrix, kGateCount> w;  // in_dim x hidden
  std::array<Matrix, kGateCount> u;  // hidden x hidden
  std::array<Matrix, kGateCount> b;  // 1 x hidden

  /// Glorot-uniform W and U; b_f = 1, other biases 0.
  static LstmLayer create(std::size_t in_dim, std::size_t hidden, Rng& rng);
  /// All twelve blocks zero.
  static LstmLayer zeros(std::size_t in_dim, std::size_t hidden);

  std::size_t in_dim() const noexcept { return w[0].rows(); }
  std::size_t hidden() const noexcept { return w[0].cols(); }
};

/// Everything lstm_backward needs. Row t of h and c holds the state after
/// step t; row 0 is the zero initial state.
struct LstmCache {
  Matrix x;                                  // T x in_dim
  Matrix h;                                  // (T+1) x hidden
  Matrix c;                                  // (T+1) x hidden
  std::array<Matrix, kGateCount> gates;      // T x hidden each, post-activation
  Matrix tanh_c;                             // T x hidden
};

struct LstmForward {
  Matrix final_hidden;  // 1 x hidden
  LstmCache cache;
};

LstmForward lstm_forward(const Matrix& x, const LstmLayer& layer);

struct LstmGradients {
  std::array<Matrix, kGateCount> w;
  std::array<Matrix, kGateCount> u;
  std::array<Matrix, kGateCount> b;

  static LstmGradients zeros_like(const LstmLayer& layer);
};

/// Backpropagation through all T steps. Parameter gradients are added to
/// `grads`; the input gradient (T x in_dim) is returned.
Matrix lstm_backward(const LstmLayer& layer, const LstmCache& cache, const Matrix& grad_final_hidden,
                     LstmGradients& grads);

// ---------------------------------------------------------------------------
// 1D convolution

/// Valid 1D convolution over the time axis. The n_filters filters, each of
/// shape (kernel_width x in_dim), are stored as the columns of one
/// (kernel_width * in_dim) x n_filters kernel: entry (j * in_dim + c, f) is
/// tap j, channel c of filter f. Because x is row-major, the window starting at
/// row t is one contiguous run of kernel_width * in_dim values.
struct Conv1dLayer {
  Matrix kernel;
  Matrix bias;  // 1 x n_filters
  Activation activation = Activation::kRelu;
  std::size_t kernel_width = 1;

  static Conv1dLayer create(std::size_t in_dim, std::size_t n_filters, std::size_t kernel_width,
                            Activation activation, Rng& rng);

  std::size_t in_dim() const noexcept { return kernel.rows() / kernel_width; }
  std::size_t n_filters() const noexcept { return kernel.cols(); }

  /// Filter f as a (kernel_width x in_dim) matrix.
  Matrix filter(std::size_t f) const;
  void set_filter(std::size_t f, const Matrix& weights);
};

struct Conv1dCache {
  Matrix x;
  Matrix out;  // post-activation
};

struct Conv1dForward {
  Matrix out;  // (T - k + 1) x n_filters
  Conv1dCache cache;
};

Conv1dForward conv1d_forward(const Matrix& x, const Conv1dLayer& layer);

struct Conv1dGradients {
  Matrix kernel;
  Matrix bias;

  static Conv1dGradients zeros_like(const Conv1dLayer& layer);
};

/// Adds filter and bias gradients into `grads`; returns the input gradient.
Matrix conv1d_backward(const Conv1dLayer& layer, const Conv1dCache& cache, const Matrix& grad_out,
                       Conv1dGradients& grads);

// ---------------------------------------------------------------------------
// Max pooling

struct MaxPoolForward {
  Matrix out;                       // floor(L / pool) x d
  std::vector<std::size_t> argmax;  // source row for each output entry, row-major
  std::size_t input_rows = 0;
};

/// Non-overlapping windows of `pool` rows; trailing rows that do not fill a
/// window are dropped. Ties go to the earliest row.
MaxPoolForward maxpool1d(const Matrix& x, std::size_t pool);
Matrix maxpool1d_backward(const MaxPoolForward& forward, const Matrix& grad_out);

// ---------------------------------------------------------------------------
// Dropout

struct DropoutSpec {
  double rate = 0.0;  // in [0, 1)
  Mode mode = Mode::kEval;
};

struct DropoutForward {
  Matrix out;
  /// 0 or 1/(1-rate) per entry; empty when the layer is an identity.
  Matrix mask;
};

/// Inverted dropout. Eval mode and rate 0 return x unchanged and draw nothing
/// from the generator.
DropoutForward dropout(const Matrix& x, const DropoutSpec& spec, Rng& rng);
Matrix dropout_backward(const DropoutForward& forward, const Matrix& grad_out);

// ---------------------------------------------------------------------------
// Dense sigmoid head

struct DenseHead {
  Matrix w;  // hidden x 1
  Matrix b;  // 1 x 1

  static DenseHead create(std::size_t hidden, Rng& rng);
};

/// p = sigmoid(h w + b) for a 1 x hidden row h.
double dense_sigmoid(const Matrix& h, const DenseHead& head);

struct DenseHeadGradients {
  Matrix w;
  Matrix b;

  static DenseHeadGradients zeros_like(const DenseHead& head);
};

/// Given dL/dp, adds dL/dw and dL/db into `grads` and returns dL/dh.
Matrix dense_sigmoid_backward(const Matrix& h, const DenseHead& head, double p, double grad_p,
                              DenseHeadGradients& grads);

}  // namespace rumorlens
