#include "trivopt/dense/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trivopt/dense/kernels.hpp"

namespace trivopt {
namespace {

std::string dims(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw DomainError("Matrix: non-finite entry");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) + " entries for shape " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) {
    throw ShapeError("Matrix::block out of range on " + dims(*this));
  }
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    std::copy_n(data_.data() + (r0 + i) * cols_ + c0, nc, b.data() + i * nc);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) {
    throw ShapeError("Matrix::set_block " + dims(b) + " out of range on " + dims(*this));
  }
  for (std::size_t i = 0; i < b.rows(); ++i)
    std::copy_n(b.data() + i * b.cols(), b.cols(), data_.data() + (r0 + i) * cols_ + c0);
}

std::vector<double> Matrix::diag() const {
  std::vector<double> d(std::min(rows_, cols_));
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
  return d;
}

double Matrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "operator+=");
  kernels::active().axpy(1.0, o.data(), data(), size());
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "operator-=");
  kernels::active().axpy(-1.0, o.data(), data(), size());
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  kernels::active().scale(s, data(), size());
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(double s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + dims(a) + " * " + dims(b));
  }
  Matrix c(a.rows(), b.cols());
  if (c.empty() || a.cols() == 0) return c;
  kernels::active().gemm(a.rows(), b.cols(), a.cols(), a.data(), a.cols(), b.data(),
                         b.cols(), c.data(), c.cols(), false);
  return c;
}

Matrix operator*(const Matrix& a, const Matrix& b) { return matmul(a, b); }

Matrix matmul_tn(const Matrix& a, const Matrix& b) { return matmul(a.transpose(), b); }
Matrix matmul_nt(const Matrix& a, const Matrix& b) { return matmul(a, b.transpose()); }

double frobenius_inner(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_inner");
  return kernels::active().dot(a.data(), b.data(), a.size());
}

double frobenius_norm(const Matrix& a) {
  // Scaled accumulation keeps the norm finite for entries near the overflow edge.
  double scale = max_abs(a);
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : a.values()) {
    const double y = x / scale;
    s += y * y;
  }
  return scale * std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.values()) m = std::max(m, std::abs(x));
  return m;
}

Matrix sym_part(const Matrix& a) {
  require_square(a, "sym_part");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

Matrix skew_part(const Matrix& a) {
  require_square(a, "skew_part");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) - a(j, i));
  return s;
}

double orthonormality_residual(const Matrix& a) {
  Matrix g = matmul_tn(a, a);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return frobenius_norm(g);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + dims(a) + " vs " + dims(b));
  }
}

void require_square(const Matrix& a, const char* what) {
  if (!a.is_square()) throw ShapeError(std::string(what) + ": expected square, got " + dims(a));
}

}  // namespace trivopt
