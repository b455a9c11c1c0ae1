#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rumorlens {

class Rng;

/// Dense row-major matrix of doubles. The only numeric container used for
/// parameters, activations and gradients. No broadcasting: every operation
/// states the shapes it accepts.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  void fill(double value);

  /// "(rows x cols)", used in error messages.
  std::string shape_string() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Activation { kSigmoid, kTanh, kRelu, kSigmoidDeriv, kTanhDeriv, kReluDeriv };

/// Parses "sigmoid", "tanh", "relu" (and the "_deriv" forms).
Activation parse_activation(const std::string& name);
std::string to_string(Activation fn);

double apply_activation(Activation fn, double x) noexcept;

enum class InitScheme { kUniformScaled, kZeros };

// ---- pure operations -------------------------------------------------------

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double factor);
Matrix elementwise(Activation fn, const Matrix& x);

/// Entries i.i.d. uniform on [-s, s], s = sqrt(6 / (rows + cols)), or all zero.
Matrix init_matrix(std::size_t rows, std::size_t cols, InitScheme scheme, Rng& rng);

double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

// ---- in-place kernels used by the layers ----------------------------------
//
// These accumulate into `out` and check shapes exactly like matmul does.

/// out += a * b
void matmul_accumulate(Matrix& out, const Matrix& a, const Matrix& b);
/// out += a^T * b
void matmul_at_b_accumulate(Matrix& out, const Matrix& a, const Matrix& b);
/// out += a * b^T
void matmul_a_bt_accumulate(Matrix& out, const Matrix& a, const Matrix& b);

/// out += row * m, where row and out are spans of length m.rows() / m.cols().
void row_times_matrix_accumulate(std::span<double> out, std::span<const double> row,
                                 const Matrix& m);
/// out += row * m^T, where row has length m.cols() and out has length m.rows().
void row_times_transpose_accumulate(std::span<double> out, std::span<const double> row,
                                    const Matrix& m);
/// m += u^T v  (rank-one update; u has m.rows() entries, v has m.cols()).
void outer_accumulate(Matrix& m, std::span<const double> u, std::span<const double> v);

/// a += factor * b
void axpy(Matrix& a, const Matrix& b, double factor = 1.0);

}  // namespace rumorlens
