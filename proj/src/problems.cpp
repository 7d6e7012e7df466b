#include "trivopt/problems.hpp"

#include <algorithm>
#include <cmath>

#include "trivopt/dense/linalg.hpp"
#include "trivopt/errors.hpp"
#include "trivopt/expm.hpp"

namespace trivopt {
namespace {

constexpr double kGradientGate = 1e-6;

double spectral_norm(const Matrix& a) { return svd(a).sigma.front(); }

void require_symmetric(const Matrix& a, const char* what) {
  require_square(a, what);
  if (frobenius_norm(a - a.transpose()) > 1e-10 * std::max(1.0, frobenius_norm(a))) {
    throw ContractError(std::string(what) + ": matrix is not symmetric");
  }
}

void require_spd(const Matrix& a, const char* what) {
  require_square(a, what);
  if (frobenius_norm(a - a.transpose()) > 1e-9 * std::max(1.0, frobenius_norm(a))) {
    throw ConstraintError(std::string(what) + ": input is not symmetric");
  }
  const auto eig = sym_eig(a);
  if (!(eig.values.front() > 0.0)) {
    throw ConstraintError(std::string(what) + ": input is not positive definite (min eigenvalue " +
                          std::to_string(eig.values.front()) + ")");
  }
  if (eig.values.back() > 1e4 * eig.values.front()) {
    throw ConstraintError(std::string(what) + ": condition number exceeds 1e4");
  }
}

// Runs the construction-time gradient gate and returns the problem.
Problem gated(Problem p, std::uint64_t seed) {
  const double err = gradient_check(p.spec, p.objective, seed);
  if (!(err <= kGradientGate)) {
    throw ContractError(p.name + ": ambient gradient disagrees with finite differences (relative " +
                        std::to_string(err) + ")");
  }
  return p;
}

Matrix spd_sqrt(const Matrix& a) {
  return sym_apply(a, [](double x) { return std::sqrt(x); });
}

Matrix spd_inv_sqrt(const Matrix& a) {
  return sym_apply(a, [](double x) { return 1.0 / std::sqrt(x); });
}

Matrix random_symmetric_spectrum(std::size_t n, std::uint64_t seed) {
  const Matrix q = random_point(ManifoldSpec::special_orthogonal(std::max<std::size_t>(n, 2)), seed);
  const Matrix qn = q.block(0, 0, n, n);
  std::vector<double> lam(n);
  for (std::size_t i = 0; i < n; ++i) lam[i] = static_cast<double>(i + 1);
  return sym_part(matmul(qn, matmul_nt(Matrix::diagonal(lam), qn)));
}

}  // namespace

double gradient_check(const ManifoldSpec& spec, const Objective& objective, std::uint64_t seed,
                      int points, double h) {
  const auto parts = spec.components();
  double worst = 0.0;
  for (int p = 0; p < points; ++p) {
    Rng rng(seed * 7919 + static_cast<std::uint64_t>(p));
    Tuple x;
    for (const auto& c : parts) x.push_back(random_point(c, rng));
    Tuple dir;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      Matrix e = unit_gaussian_matrix(x[i].rows(), x[i].cols(), rng);
      if (parts[i].kind() == ManifoldKind::SPD) e = sym_part(e);
      dir.push_back(std::move(e));
    }
    const double dnorm = tuple_norm(dir);
    for (auto& e : dir) e *= 1.0 / dnorm;

    const Evaluation ev = objective(x);
    double analytic = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) analytic += frobenius_inner(ev.gradients[i], dir[i]);

    Tuple xp = x, xm = x;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      xp[i] += h * dir[i];
      xm[i] -= h * dir[i];
    }
    const double fd = (objective(xp).value - objective(xm).value) / (2.0 * h);
    const double scale = std::max(tuple_norm(ev.gradients), 1e-12);
    worst = std::max(worst, std::abs(fd - analytic) / scale);
  }
  return worst;
}

Problem procrustes(const Matrix& a, const Matrix& b) {
  require_square(a, "procrustes");
  require_same_shape(a, b, "procrustes");
  const std::size_t n = a.rows();

  Problem p;
  p.name = "procrustes";
  p.spec = ManifoldSpec::special_orthogonal(n);
  p.objective = [a, b](const Tuple& x) {
    const Matrix r = matmul(x[0], a) - b;
    return Evaluation{frobenius_inner(r, r), {2.0 * matmul_nt(r, a)}};
  };

  const SVD s = svd(matmul_nt(b, a));
  Matrix v = s.v;
  if (determinant(matmul_nt(s.u, s.v)) < 0.0) {
    for (std::size_t i = 0; i < n; ++i) v(i, n - 1) = -v(i, n - 1);
  }
  const Matrix q = matmul_nt(s.u, v);
  p.oracle = Optimum{p.objective({q}).value, {q}};
  p.initial = {Matrix::identity(n)};
  const double sa = spectral_norm(a);
  p.ambient_hessian_bound = 2.0 * sa * sa;
  return gated(std::move(p), 11);
}

Problem rayleigh(const Matrix& a_sym) {
  require_symmetric(a_sym, "rayleigh");
  const std::size_t n = a_sym.rows();
  if (n < 2) throw ContractError("rayleigh: needs n >= 2");

  Problem p;
  p.name = "rayleigh";
  p.spec = ManifoldSpec::sphere(n);
  p.objective = [a_sym](const Tuple& x) {
    const Matrix ax = matmul(a_sym, x[0]);
    return Evaluation{frobenius_inner(x[0], ax), {2.0 * ax}};
  };
  const SymEig eig = sym_eig(a_sym);
  p.oracle = Optimum{eig.values.front(), {eig.vectors.block(0, 0, n, 1)}};
  Matrix x0(n, 1);
  for (std::size_t i = 0; i < n; ++i) x0(i, 0) = 1.0 / std::sqrt(static_cast<double>(n));
  p.initial = {x0};
  p.ambient_hessian_bound = 2.0 * std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  return gated(std::move(p), 12);
}

Matrix spd_midpoint(const Matrix& a, const Matrix& b) {
  const Matrix ah = spd_sqrt(a);
  const Matrix aih = spd_inv_sqrt(a);
  const Matrix inner = sym_part(matmul(aih, matmul(b, aih)));
  return sym_part(matmul(ah, matmul(spd_sqrt(inner), ah)));
}

double spd_distance(const Matrix& a, const Matrix& b) {
  const Matrix aih = spd_inv_sqrt(a);
  return frobenius_norm(logm_spd(sym_part(matmul(aih, matmul(b, aih)))));
}

Problem karcher_spd(const std::vector<Matrix>& points) {
  if (points.empty()) throw ContractError("karcher_spd: needs at least one point");
  const std::size_t n = points.front().rows();
  for (const auto& m : points) {
    if (m.rows() != n || m.cols() != n) throw ShapeError("karcher_spd: points differ in size");
    require_spd(m, "karcher_spd");
  }

  Problem p;
  p.name = "karcher";
  p.spec = ManifoldSpec::spd(n);
  p.objective = [points](const Tuple& x) {
    const Matrix pis = spd_inv_sqrt(sym_part(x[0]));
    double f = 0.0;
    Matrix g(pis.rows(), pis.cols());
    for (const auto& a : points) {
      const Matrix l = logm_spd(sym_part(matmul(pis, matmul(a, pis))));
      f += frobenius_inner(l, l);
      g -= 2.0 * matmul(pis, matmul(l, pis));
    }
    return Evaluation{f, {sym_part(g)}};
  };

  if (points.size() == 1) {
    p.oracle = Optimum{0.0, {points.front()}};
  } else if (points.size() == 2) {
    const Matrix mid = spd_midpoint(points[0], points[1]);
    const double d = spd_distance(points[0], points[1]);
    p.oracle = Optimum{0.5 * d * d, {mid}};
  }
  // Arithmetic mean: inside the convex hull and a sensible start.
  Matrix mean(n, n);
  for (const auto& m : points) mean += m;
  p.initial = {(1.0 / static_cast<double>(points.size())) * mean};
  return gated(std::move(p), 13);
}

Problem pca_grassmann(const Matrix& a_sym, std::size_t k) {
  require_symmetric(a_sym, "pca_grassmann");
  const std::size_t n = a_sym.rows();
  Problem p;
  p.name = "pca";
  p.spec = ManifoldSpec::grassmannian(n, k);
  p.objective = [a_sym](const Tuple& x) {
    const Matrix au = matmul(a_sym, x[0]);
    return Evaluation{-frobenius_inner(x[0], au), {-2.0 * au}};
  };
  const SymEig eig = sym_eig(a_sym);
  double f = 0.0;
  for (std::size_t i = 0; i < k; ++i) f -= eig.values[n - 1 - i];
  p.oracle = Optimum{f, {eig.vectors.block(0, n - k, n, k)}};
  p.initial = {Matrix::identity(n).block(0, 0, n, k)};
  p.ambient_hessian_bound = 2.0 * spectral_norm(a_sym);
  return gated(std::move(p), 14);
}

Problem brockett(const Matrix& a_sym, std::size_t k) {
  require_symmetric(a_sym, "brockett");
  const std::size_t n = a_sym.rows();
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = static_cast<double>(k - i);
  const Matrix nmat = Matrix::diagonal(w);

  Problem p;
  p.name = "brockett";
  p.spec = ManifoldSpec::stiefel(n, k);
  p.objective = [a_sym, nmat](const Tuple& x) {
    const Matrix au = matmul(a_sym, x[0]);
    return Evaluation{frobenius_inner(x[0], matmul(au, nmat)), {2.0 * matmul(au, nmat)}};
  };
  // The largest weight pairs with the smallest eigenvalue.
  const SymEig eig = sym_eig(a_sym);
  double f = 0.0;
  for (std::size_t i = 0; i < k; ++i) f += w[i] * eig.values[i];
  p.oracle = Optimum{f, {eig.vectors.block(0, 0, n, k)}};
  p.initial = {Matrix::identity(n).block(0, 0, n, k)};
  p.ambient_hessian_bound = 2.0 * static_cast<double>(k) * spectral_norm(a_sym);
  return gated(std::move(p), 15);
}

Problem quadratic(const Matrix& target) {
  Problem p;
  p.name = "quadratic";
  p.spec = ManifoldSpec::euclidean(target.rows(), target.cols());
  p.objective = [target](const Tuple& x) {
    const Matrix r = x[0] - target;
    return Evaluation{0.5 * frobenius_inner(r, r), {r}};
  };
  p.oracle = Optimum{0.0, {target}};
  p.initial = {Matrix(target.rows(), target.cols())};
  p.ambient_hessian_bound = 1.0;
  return gated(std::move(p), 16);
}

Problem random_procrustes(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix a = gaussian_matrix(n, n, rng);
  const Matrix b = gaussian_matrix(n, n, rng);
  return procrustes(a, b);
}

Problem random_rayleigh(std::size_t n, std::uint64_t seed) {
  return rayleigh(random_symmetric_spectrum(n, seed));
}

Problem random_karcher(std::size_t n, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Matrix> pts;
  for (std::size_t i = 0; i < count; ++i) pts.push_back(random_point(ManifoldSpec::spd(n), rng));
  return karcher_spd(pts);
}

Problem random_pca(std::size_t n, std::size_t k, std::uint64_t seed) {
  return pca_grassmann(random_symmetric_spectrum(n, seed), k);
}

Problem random_brockett(std::size_t n, std::size_t k, std::uint64_t seed) {
  return brockett(random_symmetric_spectrum(n, seed), k);
}

Problem random_quadratic(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  return quadratic(gaussian_matrix(n, k, rng));
}

}  // namespace trivopt
