#include "trivopt/manifolds.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "trivopt/dense/linalg.hpp"
#include "trivopt/errors.hpp"
#include "trivopt/expm.hpp"

namespace trivopt {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (double& x : m.values()) x = dist(rng);
  return m;
}

Matrix unit_gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m = gaussian_matrix(rows, cols, rng);
  const double nrm = frobenius_norm(m);
  return nrm > 0.0 ? (1.0 / nrm) * m : m;
}

namespace {

// Fixed seed for the completion columns used by lift(); any generic choice works.
constexpr std::uint64_t kLiftSeed = 0x1f2e3d4c5b6a7988ULL;

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_shape(const Matrix& m, Shape s, const char* what) {
  if (m.rows() != s.rows || m.cols() != s.cols) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(s.rows) + "x" +
                     std::to_string(s.cols) + ", got " + shape_str(m));
  }
}

bool is_zero(const Matrix& m) { return max_abs(m) == 0.0; }

void require_orthogonal_base(const Matrix& b, const char* what) {
  const double res = orthonormality_residual(b);
  if (!(res <= 1e-9)) {
    throw ConstraintError(std::string(what) + ": base is not orthogonal (residual " +
                          std::to_string(res) + ")");
  }
}

// [X, 0] padded to n×n.
Matrix pad_columns(const Matrix& x, std::size_t n) {
  Matrix p(n, n);
  p.set_block(0, 0, x);
  return p;
}

Matrix zero_top_rows(Matrix x, std::size_t k) {
  for (std::size_t i = 0; i < k && i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = 0.0;
  return x;
}

// Raw coordinates as seen by the Stiefel map (Grassmannian zeroes its top block).
Matrix effective_raw(const ManifoldSpec& spec, const Matrix& raw) {
  return spec.kind() == ManifoldKind::Grassmannian ? zero_top_rows(raw, spec.k()) : raw;
}

// SO(n) pullback: tril_strict(M − Mᵀ) with M = adjoint_dexpm(Ξ, BᵀG).
Matrix so_pullback(const Matrix& base, const Matrix& raw, const Matrix& g) {
  const Matrix xi = frame_skew(raw);
  const Matrix m = adjoint_dexpm(xi, matmul_tn(base, g));
  return tril_strict(m - m.transpose());
}

Matrix spd_exp(const Matrix& a, const Matrix& delta) {
  return sym_part(matmul(a, expm(solve(a, delta))));
}

}  // namespace

// ---------------------------------------------------------------------------
// ManifoldSpec

ManifoldSpec::ManifoldSpec(ManifoldKind kind, std::size_t n, std::size_t k)
    : kind_(kind), n_(n), k_(k) {}

ManifoldSpec ManifoldSpec::special_orthogonal(std::size_t n) {
  if (n < 2) throw ContractError("SO(n): requires n >= 2");
  return ManifoldSpec(ManifoldKind::SpecialOrthogonal, n, n);
}

ManifoldSpec ManifoldSpec::stiefel(std::size_t n, std::size_t k) {
  if (n < 2 || k < 1 || k >= n) {
    throw ContractError("St(n,k): requires 1 <= k < n (use SO(n) for k = n)");
  }
  return ManifoldSpec(ManifoldKind::Stiefel, n, k);
}

ManifoldSpec ManifoldSpec::grassmannian(std::size_t n, std::size_t k) {
  if (n < 2 || k < 1 || k >= n) throw ContractError("Gr(n,k): requires 1 <= k < n");
  return ManifoldSpec(ManifoldKind::Grassmannian, n, k);
}

ManifoldSpec ManifoldSpec::spd(std::size_t n) {
  if (n < 1) throw ContractError("SPD(n): requires n >= 1");
  return ManifoldSpec(ManifoldKind::SPD, n, n);
}

ManifoldSpec ManifoldSpec::sphere(std::size_t n) {
  if (n < 2) throw ContractError("Sphere(n): requires n >= 2");
  return ManifoldSpec(ManifoldKind::Sphere, n, 1);
}

ManifoldSpec ManifoldSpec::euclidean(std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1) throw ContractError("Euclidean: empty shape");
  return ManifoldSpec(ManifoldKind::Euclidean, rows, cols);
}

ManifoldSpec ManifoldSpec::product(std::vector<ManifoldSpec> components) {
  if (components.empty()) throw ContractError("Product: needs at least one component");
  for (const auto& c : components) {
    if (c.is_product()) throw ContractError("Product: nested products are not supported");
  }
  ManifoldSpec s(ManifoldKind::Product, 0, 0);
  s.parts_ = std::move(components);
  return s;
}

bool ManifoldSpec::is_stiefel_family() const noexcept {
  return kind_ == ManifoldKind::Stiefel || kind_ == ManifoldKind::Grassmannian ||
         kind_ == ManifoldKind::Sphere;
}

Shape ManifoldSpec::raw_shape() const {
  if (is_product()) throw ContractError("raw_shape: product has one shape per component");
  return Shape{n_, k_};
}

Shape ManifoldSpec::point_shape() const { return raw_shape(); }

Shape ManifoldSpec::lifted_shape() const {
  if (is_stiefel_family()) return Shape{n_, n_};
  return raw_shape();
}

std::optional<CurvatureProfile> ManifoldSpec::curvature() const {
  switch (kind_) {
    case ManifoldKind::SpecialOrthogonal:
      // SO(2) is a circle; higher n carry sectional curvature in [0, 1/4].
      if (n_ == 2) return CurvatureProfile{0.0, 0.0, 0.0, std::numbers::sqrt2 * std::numbers::pi};
      return CurvatureProfile{0.0, 0.25, 0.0, std::numbers::sqrt2 * std::numbers::pi};
    case ManifoldKind::Grassmannian:
      return CurvatureProfile{0.0, 2.0, 0.0, std::numbers::pi / 2.0};
    case ManifoldKind::Sphere:
      return CurvatureProfile{1.0, 1.0, 0.0, std::numbers::pi};
    case ManifoldKind::Euclidean:
      return flat_profile();
    default:
      return std::nullopt;
  }
}

double ManifoldSpec::frame_gain() const {
  return kind_ == ManifoldKind::SpecialOrthogonal ? std::numbers::sqrt2 : 1.0;
}

std::vector<ManifoldSpec> ManifoldSpec::components() const {
  if (is_product()) return parts_;
  return {*this};
}

std::size_t ManifoldSpec::component_count() const { return is_product() ? parts_.size() : 1; }

std::string ManifoldSpec::name() const {
  const std::string n = std::to_string(n_);
  const std::string k = std::to_string(k_);
  switch (kind_) {
    case ManifoldKind::SpecialOrthogonal: return "SO(" + n + ")";
    case ManifoldKind::Stiefel: return "St(" + n + "," + k + ")";
    case ManifoldKind::Grassmannian: return "Gr(" + n + "," + k + ")";
    case ManifoldKind::SPD: return "SPD(" + n + ")";
    case ManifoldKind::Sphere: return "Sphere(" + n + ")";
    case ManifoldKind::Euclidean: return "R^(" + n + "x" + k + ")";
    case ManifoldKind::Product: {
      std::string s = "Product[";
      for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? ", " : "") + parts_[i].name();
      return s + "]";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Frames and checks

Matrix tril_strict(const Matrix& x) {
  Matrix l(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < std::min(i, x.cols()); ++j) l(i, j) = x(i, j);
  return l;
}

Matrix frame_skew(const Matrix& x) {
  require_square(x, "frame_skew");
  Matrix s(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      s(i, j) = x(i, j);
      s(j, i) = -x(i, j);
    }
  }
  return s;
}

void check_point(const ManifoldSpec& spec, const Matrix& point, double tol) {
  require_shape(point, spec.point_shape(), "check_point");
  switch (spec.kind()) {
    case ManifoldKind::SpecialOrthogonal: {
      const double res = orthonormality_residual(point);
      if (!(res <= tol)) {
        throw ConstraintError(spec.name() + ": orthogonality residual " + std::to_string(res));
      }
      if (!(determinant(point) > 0.0)) throw ConstraintError(spec.name() + ": determinant is not +1");
      return;
    }
    case ManifoldKind::Stiefel:
    case ManifoldKind::Grassmannian:
    case ManifoldKind::Sphere: {
      const double res = orthonormality_residual(point);
      if (!(res <= tol)) {
        throw ConstraintError(spec.name() + ": column orthonormality residual " + std::to_string(res));
      }
      return;
    }
    case ManifoldKind::SPD: {
      const double asym = frobenius_norm(point - point.transpose());
      if (!(asym <= tol * std::max(1.0, frobenius_norm(point)))) {
        throw ConstraintError(spec.name() + ": not symmetric");
      }
      const SymEig eig = sym_eig(sym_part(point));
      if (!(eig.values.front() > 0.0)) {
        throw ConstraintError(spec.name() + ": not positive definite (eigenvalue " +
                              std::to_string(eig.values.front()) + ")");
      }
      return;
    }
    case ManifoldKind::Euclidean:
      return;
    case ManifoldKind::Product:
      throw ContractError("check_point: use componentwise checks for products");
  }
}

Matrix lift(const ManifoldSpec& spec, const Matrix& point) {
  check_point(spec, point);
  if (!spec.is_stiefel_family()) return point;
  const std::size_t n = spec.n();
  const std::size_t k = spec.k();
  Rng rng(kLiftSeed);
  Matrix m(n, n);
  m.set_block(0, 0, point);
  m.set_block(0, k, gaussian_matrix(n, n - k, rng));
  Matrix q = qr(m).q;
  q.set_block(0, 0, point);
  if (determinant(q) < 0.0) {
    for (std::size_t i = 0; i < n; ++i) q(i, n - 1) = -q(i, n - 1);
  }
  return q;
}

Matrix project(const ManifoldSpec& spec, const Matrix& lifted) {
  require_shape(lifted, spec.lifted_shape(), "project");
  if (!spec.is_stiefel_family()) return lifted;
  return lifted.block(0, 0, spec.n(), spec.k());
}

Matrix active_raw_mask(const ManifoldSpec& spec) {
  const Shape s = spec.raw_shape();
  Matrix m(s.rows, s.cols);
  switch (spec.kind()) {
    case ManifoldKind::SPD:
    case ManifoldKind::Euclidean:
      for (double& x : m.values()) x = 1.0;
      return m;
    case ManifoldKind::Grassmannian:
      for (std::size_t i = spec.k(); i < s.rows; ++i)
        for (std::size_t j = 0; j < s.cols; ++j) m(i, j) = 1.0;
      return m;
    default:
      for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t j = 0; j < std::min(i, s.cols); ++j) m(i, j) = 1.0;
      return m;
  }
}

// ---------------------------------------------------------------------------
// Trivialisations

Matrix triv_so(const Matrix& base, const Matrix& raw) {
  require_square(base, "triv_so");
  require_same_shape(base, raw, "triv_so");
  require_orthogonal_base(base, "triv_so");
  if (is_zero(raw)) return base;
  return matmul(base, expm(frame_skew(raw)));
}

Matrix triv_stiefel(const Matrix& lifted_base, const Matrix& raw) {
  require_square(lifted_base, "triv_stiefel");
  const std::size_t n = lifted_base.rows();
  if (raw.rows() != n || raw.cols() >= n) {
    throw ShapeError("triv_stiefel: raw must be n x k with k < n, got " + shape_str(raw));
  }
  require_orthogonal_base(lifted_base, "triv_stiefel");
  const std::size_t k = raw.cols();
  if (is_zero(raw)) return lifted_base.block(0, 0, n, k);
  const Matrix e = expm(frame_skew(pad_columns(raw, n)));
  return matmul(lifted_base, e.block(0, 0, n, k));
}

Matrix triv_grassmann(const Matrix& lifted_base, const Matrix& raw) {
  return triv_stiefel(lifted_base, zero_top_rows(raw, raw.cols()));
}

Matrix triv_spd(const Matrix& base, const Matrix& raw) {
  require_square(base, "triv_spd");
  require_same_shape(base, raw, "triv_spd");
  if (frobenius_norm(base - base.transpose()) > 1e-9 * std::max(1.0, frobenius_norm(base))) {
    throw ConstraintError("triv_spd: base is not symmetric");
  }
  if (is_zero(raw)) return base;
  try {
    return spd_exp(base, sym_part(raw));
  } catch (const SingularityError&) {
    throw ConstraintError("triv_spd: base is singular");
  }
}

Matrix triv(const ManifoldSpec& spec, const Matrix& lifted, const Matrix& raw) {
  require_shape(lifted, spec.lifted_shape(), "triv (base)");
  require_shape(raw, spec.raw_shape(), "triv (raw)");
  switch (spec.kind()) {
    case ManifoldKind::SpecialOrthogonal: return triv_so(lifted, raw);
    case ManifoldKind::Stiefel:
    case ManifoldKind::Sphere: return triv_stiefel(lifted, raw);
    case ManifoldKind::Grassmannian: return triv_grassmann(lifted, raw);
    case ManifoldKind::SPD: return triv_spd(lifted, raw);
    case ManifoldKind::Euclidean: return lifted + raw;
    case ManifoldKind::Product: break;
  }
  throw ContractError("triv: use triv_tuple for products");
}

Matrix triv_lifted(const ManifoldSpec& spec, const Matrix& lifted, const Matrix& raw) {
  if (!spec.is_stiefel_family()) return triv(spec, lifted, raw);
  require_shape(lifted, spec.lifted_shape(), "triv_lifted (base)");
  require_shape(raw, spec.raw_shape(), "triv_lifted (raw)");
  require_orthogonal_base(lifted, "triv_lifted");
  const Matrix x = effective_raw(spec, raw);
  if (is_zero(x)) return lifted;
  return matmul(lifted, expm(frame_skew(pad_columns(x, spec.n()))));
}

Matrix pullback_grad(const ManifoldSpec& spec, const Matrix& lifted, const Matrix& raw,
                     const Matrix& ambient_grad) {
  require_shape(lifted, spec.lifted_shape(), "pullback_grad (base)");
  require_shape(raw, spec.raw_shape(), "pullback_grad (raw)");
  require_shape(ambient_grad, spec.point_shape(), "pullback_grad (gradient)");
  switch (spec.kind()) {
    case ManifoldKind::SpecialOrthogonal:
      return so_pullback(lifted, raw, ambient_grad);
    case ManifoldKind::Stiefel:
    case ManifoldKind::Sphere:
    case ManifoldKind::Grassmannian: {
      const std::size_t n = spec.n();
      const std::size_t k = spec.k();
      const Matrix full =
          so_pullback(lifted, pad_columns(effective_raw(spec, raw), n), pad_columns(ambient_grad, n));
      return effective_raw(spec, full.block(0, 0, n, k));
    }
    case ManifoldKind::SPD: {
      // f(sym(A exp(A⁻¹ sym X))): adjoints of sym, left multiplication by A,
      // dexpm at Y = A⁻¹ sym X, left multiplication by A⁻¹, then sym again.
      const Matrix y = solve(lifted, sym_part(raw));
      const Matrix inner = adjoint_dexpm(y, matmul_tn(lifted, sym_part(ambient_grad)));
      return sym_part(solve(lifted.transpose(), inner));
    }
    case ManifoldKind::Euclidean:
      return ambient_grad;
    case ManifoldKind::Product: break;
  }
  throw ContractError("pullback_grad: use pullback_grad_tuple for products");
}

Matrix tangent_project_so(const Matrix& base, const Matrix& m) {
  require_square(base, "tangent_project_so");
  require_same_shape(base, m, "tangent_project_so");
  return 0.5 * (m - matmul(base, matmul(m.transpose(), base)));
}

// ---------------------------------------------------------------------------
// Sampling

Matrix random_point(const ManifoldSpec& spec, Rng& rng) {
  const std::size_t n = spec.n();
  switch (spec.kind()) {
    case ManifoldKind::SpecialOrthogonal: {
      Matrix q = qr(gaussian_matrix(n, n, rng)).q;
      if (determinant(q) < 0.0) {
        for (std::size_t i = 0; i < n; ++i) q(i, 0) = -q(i, 0);
      }
      return q;
    }
    case ManifoldKind::Stiefel:
    case ManifoldKind::Grassmannian:
    case ManifoldKind::Sphere:
      return qr(gaussian_matrix(n, spec.k(), rng)).q;
    case ManifoldKind::SPD: {
      const Matrix v = random_point(ManifoldSpec::special_orthogonal(std::max<std::size_t>(n, 2)), rng);
      std::uniform_real_distribution<double> u(std::log(0.5), std::log(2.0));
      std::vector<double> lam(n);
      for (double& l : lam) l = std::exp(u(rng));
      const Matrix vn = v.block(0, 0, n, n);
      return sym_part(matmul(vn, matmul_nt(Matrix::diagonal(lam), vn)));
    }
    case ManifoldKind::Euclidean:
      return gaussian_matrix(n, spec.k(), rng);
    case ManifoldKind::Product: break;
  }
  throw ContractError("random_point: use random_tuple for products");
}

Matrix random_point(const ManifoldSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return random_point(spec, rng);
}

Tuple random_tuple(const ManifoldSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Tuple t;
  for (const auto& c : spec.components()) t.push_back(random_point(c, rng));
  return t;
}

Matrix henaff_init(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ContractError("henaff_init: requires n >= 2");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  Matrix s(n, n);
  for (std::size_t i = 0; i + 1 < n; i += 2) {
    const double v = u(rng);
    s(i, i + 1) = -v;
    s(i + 1, i) = v;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Products

namespace {

void require_arity(const ManifoldSpec& spec, std::size_t got, const char* what) {
  if (got != spec.component_count()) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(spec.component_count()) +
                     " components, got " + std::to_string(got));
  }
}

}  // namespace

Tuple triv_tuple(const ManifoldSpec& spec, const Tuple& lifted, const Tuple& raw) {
  require_arity(spec, lifted.size(), "triv_tuple");
  require_arity(spec, raw.size(), "triv_tuple");
  const auto& parts = spec.components();
  Tuple out;
  out.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) out.push_back(triv(parts[i], lifted[i], raw[i]));
  return out;
}

Tuple triv_lifted_tuple(const ManifoldSpec& spec, const Tuple& lifted, const Tuple& raw) {
  require_arity(spec, lifted.size(), "triv_lifted_tuple");
  require_arity(spec, raw.size(), "triv_lifted_tuple");
  const auto& parts = spec.components();
  Tuple out;
  out.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.push_back(triv_lifted(parts[i], lifted[i], raw[i]));
  }
  return out;
}

Tuple pullback_grad_tuple(const ManifoldSpec& spec, const Tuple& lifted, const Tuple& raw,
                          const Tuple& ambient_grad) {
  require_arity(spec, lifted.size(), "pullback_grad_tuple");
  require_arity(spec, raw.size(), "pullback_grad_tuple");
  require_arity(spec, ambient_grad.size(), "pullback_grad_tuple");
  const auto& parts = spec.components();
  Tuple out;
  out.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.push_back(pullback_grad(parts[i], lifted[i], raw[i], ambient_grad[i]));
  }
  return out;
}

Tuple lift_tuple(const ManifoldSpec& spec, const Tuple& points) {
  require_arity(spec, points.size(), "lift_tuple");
  const auto& parts = spec.components();
  Tuple out;
  for (std::size_t i = 0; i < parts.size(); ++i) out.push_back(lift(parts[i], points[i]));
  return out;
}

Tuple zero_raw_tuple(const ManifoldSpec& spec) {
  Tuple out;
  for (const auto& c : spec.components()) {
    const Shape s = c.raw_shape();
    out.emplace_back(s.rows, s.cols);
  }
  return out;
}

double tuple_norm(const Tuple& t) {
  double s = 0.0;
  for (const auto& m : t) {
    const double x = frobenius_norm(m);
    s += x * x;
  }
  return std::sqrt(s);
}

}  // namespace trivopt
