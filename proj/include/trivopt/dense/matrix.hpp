#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "trivopt/errors.hpp"

namespace trivopt {

// Dense row-major double matrix. Value type; copies are deep.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  // Nested-list literal, e.g. Matrix{{1, 2}, {3, 4}}. Ragged or non-finite input throws.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix diagonal(std::span<const double> d);
  static Matrix column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);
  std::vector<double> diag() const;
  double trace() const;

  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(double s, Matrix a);
Matrix operator*(Matrix a, double s);
// Matrix product; throws ShapeError on inner-dimension mismatch.
Matrix operator*(const Matrix& a, const Matrix& b);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // aᵀ b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a bᵀ

double frobenius_norm(const Matrix& a);
double frobenius_inner(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

Matrix sym_part(const Matrix& a);   // (a + aᵀ)/2
Matrix skew_part(const Matrix& a);  // (a - aᵀ)/2

// ‖AᵀA − I‖_F
double orthonormality_residual(const Matrix& a);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);
void require_square(const Matrix& a, const char* what);

}  // namespace trivopt
