#include "rumorlens/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "rumorlens/errors.hpp"
#include "rumorlens/rng.hpp"

namespace rumorlens {

namespace {

std::string shape_of(std::size_t rows, std::size_t cols) {
  return "(" + std::to_string(rows) + " x " + std::to_string(cols) + ")";
}

[[noreturn]] void mismatch(const char* op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                       b.shape_string());
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) mismatch(op, a, b);
}

double sigmoid(double z) noexcept {
  // Split by sign so exp never overflows.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: " + std::to_string(data_.size()) +
                         " values cannot fill shape " + shape_of(rows, cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::string Matrix::shape_string() const { return shape_of(rows_, cols_); }

Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid_deriv") return Activation::kSigmoidDeriv;
  if (name == "tanh_deriv") return Activation::kTanhDeriv;
  if (name == "relu_deriv") return Activation::kReluDeriv;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(Activation fn) {
  switch (fn) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoidDeriv: return "sigmoid_deriv";
    case Activation::kTanhDeriv: return "tanh_deriv";
    case Activation::kReluDeriv: return "relu_deriv";
  }
  return "?";
}

// Derivatives take the activation OUTPUT, not the pre-activation.
double apply_activation(Activation fn, double x) noexcept {
  switch (fn) {
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kTanh: return std::tanh(x);
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kSigmoidDeriv: return x * (1.0 - x);
    case Activation::kTanhDeriv: return 1.0 - x * x;
    case Activation::kReluDeriv: return x > 0.0 ? 1.0 : 0.0;
  }
  return x;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) mismatch("matmul", a, b);
  Matrix out(a.rows(), b.cols());
  matmul_accumulate(out, a, b);
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape("add", a, b);
  Matrix out = a;
  axpy(out, b, 1.0);
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape("subtract", a, b);
  Matrix out = a;
  axpy(out, b, -1.0);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape("hadamard", a, b);
  Matrix out = a;
  auto o = out.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= y[i];
  return out;
}

Matrix scale(const Matrix& a, double factor) {
  Matrix out = a;
  for (double& v : out.data()) v *= factor;
  return out;
}

Matrix elementwise(Activation fn, const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data()) v = apply_activation(fn, v);
  return out;
}

Matrix init_matrix(std::size_t rows, std::size_t cols, InitScheme scheme, Rng& rng) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("init_matrix: shape " + shape_of(rows, cols) + " has a zero extent");
  }
  Matrix out(rows, cols);
  if (scheme == InitScheme::kZeros) return out;
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : out.data()) v = rng.uniform(-limit, limit);
  return out;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

void matmul_accumulate(Matrix& out, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) mismatch("matmul", a, b);
  if (out.rows() != a.rows() || out.cols() != b.cols()) {
    throw DimensionError("matmul: output " + out.shape_string() + " does not fit " +
                         a.shape_string() + " * " + b.shape_string());
  }
  for (std::size_t i = 0; i < a.rows(); ++i) row_times_matrix_accumulate(out.row(i), a.row(i), b);
}

void matmul_at_b_accumulate(Matrix& out, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) mismatch("matmul_at_b", a, b);
  if (out.rows() != a.cols() || out.cols() != b.cols()) {
    throw DimensionError("matmul_at_b: output " + out.shape_string() + " does not fit " +
                         a.shape_string() + "^T * " + b.shape_string());
  }
  for (std::size_t k = 0; k < a.rows(); ++k) outer_accumulate(out, a.row(k), b.row(k));
}

void matmul_a_bt_accumulate(Matrix& out, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) mismatch("matmul_a_bt", a, b);
  if (out.rows() != a.rows() || out.cols() != b.rows()) {
    throw DimensionError("matmul_a_bt: output " + out.shape_string() + " does not fit " +
                         a.shape_string() + " * " + b.shape_string() + "^T");
  }
  for (std::size_t i = 0; i < a.rows(); ++i) row_times_transpose_accumulate(out.row(i), a.row(i), b);
}

void row_times_matrix_accumulate(std::span<double> out, std::span<const double> row,
                                 const Matrix& m) {
  const std::size_t n = m.cols();
  double* __restrict o = out.data();
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const double coeff = row[k];
    if (coeff == 0.0) continue;
    const double* __restrict src = m.row(k).data();
    for (std::size_t j = 0; j < n; ++j) o[j] += coeff * src[j];
  }
}

void row_times_transpose_accumulate(std::span<double> out, std::span<const double> row,
                                    const Matrix& m) {
  const std::size_t n = m.cols();
  const double* __restrict r = row.data();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* __restrict src = m.row(i).data();
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += r[j] * src[j];
    out[i] += acc;
  }
}

void outer_accumulate(Matrix& m, std::span<const double> u, std::span<const double> v) {
  const std::size_t n = m.cols();
  const double* __restrict src = v.data();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double coeff = u[i];
    if (coeff == 0.0) continue;
    double* __restrict dst = m.row(i).data();
    for (std::size_t j = 0; j < n; ++j) dst[j] += coeff * src[j];
  }
}

void axpy(Matrix& a, const Matrix& b, double factor) {
  require_same_shape("axpy", a, b);
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += factor * y[i];
}

}  // namespace rumorlens
