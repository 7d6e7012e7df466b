#include "trivopt/dense/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace trivopt {
namespace {

constexpr int kMaxSweeps = 100;

// Applies the Householder reflector I − 2 v vᵀ (v unit) acting on rows [k, m) of
// every column of `a` starting at `col0`.
void reflect_columns(Matrix& a, const std::vector<double>& v, std::size_t k, std::size_t col0) {
  const std::size_t m = a.rows();
  for (std::size_t j = col0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += v[i - k] * a(i, j);
    s *= 2.0;
    for (std::size_t i = k; i < m; ++i) a(i, j) -= s * v[i - k];
  }
}

void sort_eigen(std::vector<double>& values, Matrix& vectors, bool ascending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? values[a] < values[b] : values[a] > values[b];
  });
  std::vector<double> sorted(n);
  Matrix v(vectors.rows(), n);
  for (std::size_t c = 0; c < n; ++c) {
    sorted[c] = values[order[c]];
    for (std::size_t r = 0; r < vectors.rows(); ++r) v(r, c) = vectors(r, order[c]);
  }
  values = std::move(sorted);
  vectors = std::move(v);
}

struct LU {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
  std::size_t bad_pivot = 0;
};

LU lu_decompose(const Matrix& a) {
  require_square(a, "lu");
  const std::size_t n = a.rows();
  LU f{a, std::vector<std::size_t>(n), 1, false, 0};
  std::iota(f.perm.begin(), f.perm.end(), 0);
  const double tol = 1e-13 * frobenius_norm(a);
  Matrix& m = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    if (std::abs(m(p, k)) <= tol) {
      f.singular = true;
      f.bad_pivot = k;
      return f;
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(k, j));
      std::swap(f.perm[p], f.perm[k]);
      f.sign = -f.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = m(i, k) / m(k, k);
      m(i, k) = l;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
    }
  }
  return f;
}

}  // namespace

QR qr(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) {
    throw ShapeError("qr: expected rows >= cols, got " + std::to_string(m) + "x" +
                     std::to_string(n));
  }
  Matrix r = a;
  std::vector<std::vector<double>> reflectors(n);
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm = std::hypot(norm, r(i, k));
    std::vector<double> v(m - k, 0.0);
    if (norm > 0.0) {
      const double alpha = r(k, k) > 0 ? -norm : norm;
      for (std::size_t i = k; i < m; ++i) v[i - k] = r(i, k);
      v[0] -= alpha;
      double vn = 0.0;
      for (double x : v) vn = std::hypot(vn, x);
      if (vn > 0.0) {
        for (double& x : v) x /= vn;
        reflect_columns(r, v, k, k);
      } else {
        v.assign(v.size(), 0.0);
      }
    }
    reflectors[k] = std::move(v);
  }
  Matrix q(m, n);
  for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;
  for (std::size_t k = n; k-- > 0;) reflect_columns(q, reflectors[k], k, 0);

  Matrix rr(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) rr(i, j) = r(i, j);
  for (std::size_t i = 0; i < n; ++i) {
    if (rr(i, i) < 0.0) {
      for (std::size_t j = i; j < n; ++j) rr(i, j) = -rr(i, j);
      for (std::size_t row = 0; row < m; ++row) q(row, i) = -q(row, i);
    }
  }
  return {std::move(q), std::move(rr)};
}

SymEig sym_eig(const Matrix& s) {
  require_square(s, "sym_eig");
  const std::size_t n = s.rows();
  const double norm = frobenius_norm(s);
  if (frobenius_norm(s - s.transpose()) > 1e-10 * norm) {
    throw ContractError("sym_eig: input is not symmetric");
  }
  Matrix a = sym_part(s);
  Matrix v = Matrix::identity(n);
  const double target = 1e-14 * norm;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::hypot(off, a(p, q));
    if (std::sqrt(2.0) * off <= target) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  SymEig out{a.diag(), std::move(v)};
  sort_eigen(out.values, out.vectors, true);
  return out;
}

SVD svd(const Matrix& a) {
  if (a.rows() < a.cols()) {
    SVD t = svd(a.transpose());
    return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  // Rows of w are the columns of A, so rotations touch contiguous memory.
  Matrix w = a.transpose();
  Matrix vt = Matrix::identity(n);  // rows are columns of V
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          alpha += w(i, k) * w(i, k);
          beta += w(j, k) * w(j, k);
          gamma += w(i, k) * w(j, k);
        }
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < m; ++k) {
          const double wi = w(i, k);
          const double wj = w(j, k);
          w(i, k) = c * wi - s * wj;
          w(j, k) = s * wi + c * wj;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vi = vt(i, k);
          const double vj = vt(j, k);
          vt(i, k) = c * vi - s * vj;
          vt(j, k) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s = std::hypot(s, w(i, k));
    sigma[i] = s;
  }
  Matrix u = w.transpose();
  Matrix v = vt.transpose();
  // Sort descending, carrying the columns along.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
  SVD out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  const double smax = n ? sigma[order[0]] : 0.0;
  const double zero_tol = std::max(smax, 1.0) * 1e-14 * static_cast<double>(std::max(m, n));
  std::vector<std::size_t> to_complete;
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.sigma[c] = sigma[src];
    for (std::size_t r = 0; r < n; ++r) out.v(r, c) = v(r, src);
    if (sigma[src] > zero_tol) {
      for (std::size_t r = 0; r < m; ++r) out.u(r, c) = u(r, src) / sigma[src];
    } else {
      to_complete.push_back(c);
    }
  }
  // Null singular values: fill the U columns with an orthonormal completion.
  for (std::size_t c : to_complete) {
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < m; ++e) {
      std::vector<double> cand(m, 0.0);
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t other = 0; other < n; ++other) {
          if (other == c) continue;
          double d = 0.0;
          for (std::size_t r = 0; r < m; ++r) d += out.u(r, other) * cand[r];
          for (std::size_t r = 0; r < m; ++r) cand[r] -= d * out.u(r, other);
        }
      }
      double nn = 0.0;
      for (double x : cand) nn = std::hypot(nn, x);
      if (nn > best_norm) {
        best_norm = nn;
        best = std::move(cand);
      }
    }
    for (std::size_t r = 0; r < m; ++r) out.u(r, c) = best[r] / best_norm;
  }
  return out;
}

Matrix solve(const Matrix& a, const Matrix& b) {
  require_square(a, "solve");
  if (b.rows() != a.rows()) throw ShapeError("solve: right-hand side row mismatch");
  const LU f = lu_decompose(a);
  if (f.singular) {
    throw SingularityError("solve: singular pivot at index " + std::to_string(f.bad_pivot),
                           f.bad_pivot);
  }
  const std::size_t n = a.rows();
  Matrix x(n, b.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) = b(f.perm[i], j);
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = x(i, j);
      for (std::size_t k = 0; k < i; ++k) s -= f.lu(i, k) * x(k, j);
      x(i, j) = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x(i, j);
      for (std::size_t k = i + 1; k < n; ++k) s -= f.lu(i, k) * x(k, j);
      x(i, j) = s / f.lu(i, i);
    }
  }
  return x;
}

Matrix inverse(const Matrix& a) { return solve(a, Matrix::identity(a.rows())); }

double determinant(const Matrix& a) {
  const LU f = lu_decompose(a);
  if (f.singular) return 0.0;
  double d = f.sign;
  for (std::size_t i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
  return d;
}

Matrix sym_apply(const SymEig& eig, const std::function<double(double)>& f) {
  const std::size_t n = eig.values.size();
  Matrix scaled = eig.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double fj = f(eig.values[j]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= fj;
  }
  return sym_part(matmul_nt(scaled, eig.vectors));
}

Matrix sym_apply(const Matrix& s, const std::function<double(double)>& f) {
  return sym_apply(sym_eig(s), f);
}

}  // namespace trivopt
