#include "trivopt/expm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "trivopt/dense/linalg.hpp"
#include "trivopt/errors.hpp"

namespace trivopt {
namespace {

constexpr double kUnitRoundoff = 0x1p-53;

// Coefficients of the three-product degree-8 scheme
//   A4 = A2 (x1 A + x2 A2)
//   A8 = (x3 A2 + A4)(x4 I + x5 A + x6 A2 + x7 A4)
//   T8 = I + A + y2 A2 + A8
// obtained by matching the Taylor coefficients of exp through order 8.
constexpr double kX1 = -0.09785229482715554;
constexpr double kX2 = -0.02446307370678889;
constexpr double kX3 = -0.6019939079158924;
constexpr double kX4 = -0.6055005438660962;
constexpr double kX5 = -0.17843544181727197;
constexpr double kX6 = -0.015604717338044253;
constexpr double kX7 = 0.0414435957537413;
constexpr double kY2 = 0.1354923613528506;

double inv_factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f /= i;
  return f;
}

// Sum of the neglected series terms, x^k / k! for k > d.
double taylor_tail(int degree, double x) {
  double term = std::pow(x, degree + 1) * inv_factorial(degree + 1);
  double sum = 0.0;
  for (int k = degree + 1; k < degree + 80 && term > 0.0; ++k) {
    sum += term;
    term *= x / (k + 1);
  }
  return sum;
}

// Largest x with tail_d(x) ≤ u e^{-x}. Since ‖e^A‖ ≥ e^{-‖A‖}, this bounds the
// truncation error relative to the result.
double compute_threshold(int degree) {
  double lo = 0.0;
  double hi = 16.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (taylor_tail(degree, mid) <= kUnitRoundoff * std::exp(-mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

const std::array<double, kTaylorDegrees.size()>& thresholds() {
  static const auto table = [] {
    std::array<double, kTaylorDegrees.size()> t{};
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = compute_threshold(kTaylorDegrees[i]);
    return t;
  }();
  return table;
}

std::size_t degree_index(int degree) {
  const auto* it = std::find(kTaylorDegrees.begin(), kTaylorDegrees.end(), degree);
  if (it == kTaylorDegrees.end()) {
    throw DomainError("expm: unsupported Taylor degree " + std::to_string(degree));
  }
  return static_cast<std::size_t>(it - kTaylorDegrees.begin());
}

// Paterson-Stockmeyer block size for each supported degree (8 uses the
// factored scheme instead).
int block_size(int degree) {
  switch (degree) {
    case 1: return 1;
    case 2: return 2;
    case 4: return 2;
    case 12: return 3;
    case 18: return 4;
    default: return 0;
  }
}

int product_count(int degree) {
  if (degree == 8) return 3;
  const int p = block_size(degree);
  const int q = degree / p;
  const bool scalar_top = degree % p == 0;
  return (p - 1) + (scalar_top ? q - 1 : q);
}

void add_scaled_identity(Matrix& m, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += s;
}

// Σ_{i<p} c[offset+i] A^i using precomputed powers; coefficients past `degree` are zero.
Matrix block_poly(const std::vector<Matrix>& powers, int offset, int p, int degree) {
  const std::size_t n = powers[1].rows();
  Matrix b(n, n);
  add_scaled_identity(b, inv_factorial(offset));
  for (int i = 1; i < p && offset + i <= degree; ++i) {
    b += inv_factorial(offset + i) * powers[i];
  }
  return b;
}

Matrix paterson_stockmeyer(const Matrix& a, int degree) {
  const int p = block_size(degree);
  const int q = degree / p;
  std::vector<Matrix> powers(p + 1);
  powers[1] = a;
  for (int i = 2; i <= p; ++i) powers[i] = matmul(powers[i - 1], a);

  Matrix r;
  int j = q;
  if (degree % p == 0) {
    // Top block is c_d I, so its product with A^p is a scaling.
    r = inv_factorial(degree) * powers[p] + block_poly(powers, (q - 1) * p, p, degree);
    j = q - 1;
  } else {
    r = block_poly(powers, q * p, p, degree);
  }
  for (--j; j >= 0; --j) {
    r = matmul(r, powers[p]) + block_poly(powers, j * p, p, degree);
  }
  return r;
}

Matrix factored_degree8(const Matrix& a) {
  const Matrix a2 = matmul(a, a);
  const Matrix a4 = matmul(a2, kX1 * a + kX2 * a2);
  Matrix right = kX5 * a + kX6 * a2 + kX7 * a4;
  add_scaled_identity(right, kX4);
  Matrix t = matmul(kX3 * a2 + a4, right);
  t += a + kY2 * a2;
  add_scaled_identity(t, 1.0);
  return t;
}

}  // namespace

double taylor_threshold(int degree) { return thresholds()[degree_index(degree)]; }

Matrix taylor_polynomial(const Matrix& a, int degree) {
  require_square(a, "taylor_polynomial");
  degree_index(degree);
  if (a.empty()) return a;
  return degree == 8 ? factored_degree8(a) : paterson_stockmeyer(a, degree);
}

Matrix expm(const Matrix& a, ExpmReport* report) {
  require_square(a, "expm");
  const double norm = frobenius_norm(a);

  // Minimise matrix products: polynomial cost plus one product per squaring.
  int best_degree = 1;
  int best_s = 0;
  int best_cost = std::numeric_limits<int>::max();
  for (int d : kTaylorDegrees) {
    const double theta = taylor_threshold(d);
    int s = 0;
    if (norm > theta) s = static_cast<int>(std::ceil(std::log2(norm / theta)));
    // Guard against log2 rounding leaving the scaled norm a hair above theta.
    while (std::ldexp(norm, -s) > theta) ++s;
    const int cost = product_count(d) + s;
    if (cost < best_cost || (cost == best_cost && s < best_s)) {
      best_cost = cost;
      best_degree = d;
      best_s = s;
    }
  }
  if (report != nullptr) *report = ExpmReport{best_s, best_degree, norm};

  if (a.empty()) return a;
  if (norm == 0.0) return Matrix::identity(a.rows());

  Matrix r = taylor_polynomial(std::ldexp(1.0, -best_s) * a, best_degree);
  for (int i = 0; i < best_s; ++i) r = matmul(r, r);
  return r;
}

Matrix dexpm(const Matrix& x, const Matrix& e) {
  require_square(x, "dexpm");
  require_same_shape(x, e, "dexpm");
  if (max_abs(x) == 0.0) return e;
  const std::size_t n = x.rows();
  Matrix big(2 * n, 2 * n);
  big.set_block(0, 0, x);
  big.set_block(0, n, e);
  big.set_block(n, n, x);
  return expm(big).block(0, n, n, n);
}

Matrix adjoint_dexpm(const Matrix& x, const Matrix& g) {
  require_square(x, "adjoint_dexpm");
  require_same_shape(x, g, "adjoint_dexpm");
  return dexpm(x.transpose(), g);
}

Matrix logm_spd(const Matrix& p) {
  require_square(p, "logm_spd");
  const SymEig eig = sym_eig(p);
  if (eig.values.empty()) return p;
  const double top = eig.values.back();
  for (double lambda : eig.values) {
    if (!(lambda > 0.0) || lambda <= 1e-12 * top) {
      std::ostringstream os;
      os.precision(17);
      os << "logm_spd: matrix is not positive definite (eigenvalue " << lambda << ")";
      throw DomainError(os.str());
    }
  }
  return sym_part(sym_apply(eig, [](double l) { return std::log(l); }));
}

}  // namespace trivopt
