#include "trivopt/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

#include "trivopt/curvature.hpp"
#include "trivopt/dense/linalg.hpp"
#include "trivopt/errors.hpp"
#include "trivopt/expm.hpp"

namespace trivopt {
namespace {

using Vec = std::vector<double>;

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec axpy(double alpha, const Vec& x, Vec y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
  return y;
}

Vec scaled(double alpha, Vec x) {
  for (double& v : x) v *= alpha;
  return x;
}

Vec normalized(Vec x) {
  const double n = norm(x);
  return n > 0.0 ? scaled(1.0 / n, std::move(x)) : x;
}

// Orthonormal basis of R^d whose first vector is v.
std::vector<Vec> basis_with_first(const Vec& v, std::uint64_t seed) {
  const std::size_t d = v.size();
  Rng rng(seed);
  Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, 0) = v[i];
  if (d > 1) m.set_block(0, 1, gaussian_matrix(d, d - 1, rng));
  const Matrix q = qr(m).q;
  std::vector<Vec> out(d, Vec(d));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) out[j][i] = q(i, j);
  out[0] = v;
  return out;
}

// Orthonormal basis (columns) of the tangent space at a lifted point, in
// embedding coordinates.
Matrix tangent_frame(const ExpChart& at_point, double h) {
  const std::size_t d = at_point.dim();
  const std::size_t big = at_point.embed(Vec(d, 0.0)).size();
  Matrix j(big, d);
  for (std::size_t a = 0; a < d; ++a) {
    Vec e(d, 0.0);
    e[a] = h;
    const Vec fp = at_point.embed(e);
    e[a] = -h;
    const Vec fm = at_point.embed(e);
    for (std::size_t i = 0; i < big; ++i) j(i, a) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return qr(j).q;
}

Vec coords_in(const Matrix& frame, const Vec& x) {
  Vec c(frame.cols(), 0.0);
  for (std::size_t i = 0; i < frame.rows(); ++i)
    for (std::size_t a = 0; a < frame.cols(); ++a) c[a] += frame(i, a) * x[i];
  return c;
}

// A symmetric family T_ab of vectors: the bilinear form (∇d exp)(e_a, e_b).
struct VectorForm {
  std::size_t m = 0;
  std::vector<Vec> t;  // row-major m×m
  const Vec& at(std::size_t a, std::size_t b) const { return t[a * m + b]; }
  Vec apply(const Vec& u) const {
    Vec out(t.front().size(), 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) out = axpy(u[a] * u[b], at(a, b), std::move(out));
    return out;
  }
};

// sup over unit u of ‖T(u, u)‖: random probes, then 5 steps of the fixed-point
// iteration u ← ∇‖T(u,u)‖² / ‖·‖ from the best probe.
double max_norm(const VectorForm& form, int probes, std::uint64_t seed) {
  const std::size_t m = form.m;
  if (m == 0) return 0.0;
  Rng rng(seed);
  std::normal_distribution<double> g;
  Vec best_u;
  double best = -1.0;
  auto consider = [&](const Vec& u) {
    const double v = norm(form.apply(u));
    if (v > best) {
      best = v;
      best_u = u;
    }
  };
  for (std::size_t a = 0; a < m; ++a) {
    Vec e(m, 0.0);
    e[a] = 1.0;
    consider(e);
  }
  for (int p = 0; p < probes; ++p) {
    Vec u(m);
    for (double& x : u) x = g(rng);
    consider(normalized(u));
  }
  Vec u = best_u;
  for (int it = 0; it < 5; ++it) {
    const Vec q = form.apply(u);
    Vec grad(m, 0.0);
    for (std::size_t b = 0; b < m; ++b) {
      Vec tub(q.size(), 0.0);
      for (std::size_t a = 0; a < m; ++a) tub = axpy(u[a], form.at(a, b), std::move(tub));
      grad[b] = dot(q, tub);
    }
    if (norm(grad) == 0.0) break;
    u = normalized(grad);
    consider(u);
  }
  return best;
}

std::string chart_params(const ManifoldSpec& spec, double r) {
  return spec.name() + " r=" + num(r);
}

Matrix lifted_of(const ManifoldSpec& spec, const Matrix& lifted_base, const Matrix& raw) {
  return triv_lifted(spec, lifted_base, raw);
}

}  // namespace

// ---------------------------------------------------------------------------

void FDConfig::validate() const {
  if (!(h > 0.0 && h < 1e-2)) throw ContractError("FDConfig: h must lie in (0, 1e-2)");
  if (probe_count < 1) throw ContractError("FDConfig: probe_count must be positive");
}

Matrix fd_directional(const MatrixMap& map, const Matrix& x, const Matrix& e, const FDConfig& cfg) {
  cfg.validate();
  require_same_shape(x, e, "fd_directional");
  const Matrix fp = map(x + cfg.h * e);
  const Matrix fm = map(x - cfg.h * e);
  return (1.0 / (2.0 * cfg.h)) * (fp - fm);
}

std::string CheckReport::line() const {
  std::ostringstream os;
  os << name << " | " << params << " | " << num(estimate) << " | " << num(bound) << " | "
     << (skipped ? "SKIP" : pass ? "PASS" : "FAIL");
  if (!detail.empty()) os << " | " << detail;
  return os.str();
}

std::vector<double> isometric_embedding(const ManifoldSpec& spec, const Matrix& point) {
  switch (spec.kind()) {
    case ManifoldKind::SpecialOrthogonal:
    case ManifoldKind::Sphere:
    case ManifoldKind::Euclidean: {
      auto v = point.values();
      return Vec(v.begin(), v.end());
    }
    case ManifoldKind::Stiefel: {
      const Matrix p = matmul_nt(point, point);
      Vec out;
      out.reserve(point.size() + p.size());
      for (double x : point.values()) out.push_back(x / std::numbers::sqrt2);
      for (double x : p.values()) out.push_back(0.5 * x);
      return out;
    }
    case ManifoldKind::Grassmannian: {
      const Matrix p = matmul_nt(point, point);
      Vec out;
      for (double x : p.values()) out.push_back(x / std::numbers::sqrt2);
      return out;
    }
    default:
      throw ContractError("isometric_embedding: not available for " + spec.name());
  }
}

ExpChart::ExpChart(const ManifoldSpec& spec, const Matrix& lifted_base)
    : spec_(spec), base_(lifted_base) {
  if (spec.kind() != ManifoldKind::SpecialOrthogonal && !spec.is_stiefel_family() &&
      spec.kind() != ManifoldKind::Euclidean) {
    throw ContractError("ExpChart: unsupported manifold " + spec.name());
  }
  const Matrix mask = active_raw_mask(spec);
  const double inv_gain = 1.0 / spec.frame_gain();
  for (std::size_t i = 0; i < mask.rows(); ++i) {
    for (std::size_t j = 0; j < mask.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      Matrix e(mask.rows(), mask.cols());
      e(i, j) = inv_gain;
      basis_.push_back(std::move(e));
    }
  }
}

Matrix ExpChart::raw_of(const std::vector<double>& u) const {
  if (u.size() != basis_.size()) throw ShapeError("ExpChart: coordinate dimension mismatch");
  const Shape s = spec_.raw_shape();
  Matrix raw(s.rows, s.cols);
  for (std::size_t a = 0; a < u.size(); ++a) {
    if (u[a] != 0.0) raw += u[a] * basis_[a];
  }
  return raw;
}

std::vector<double> ExpChart::embed(const std::vector<double>& u) const {
  return isometric_embedding(spec_, triv(spec_, base_, raw_of(u)));
}

std::vector<double> ExpChart::embed_lifted(const Matrix& lifted) const {
  return isometric_embedding(spec_, project(spec_, lifted));
}

RauchEstimate estimate_rauch(const ExpChart& chart, const std::vector<double>& v, double r,
                             const FDConfig& cfg) {
  cfg.validate();
  const std::size_t d = chart.dim();
  const auto basis = basis_with_first(normalized(v), cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const Vec x0 = scaled(r, basis[0]);
  // Normal directions; a one-dimensional manifold only has the radial one.
  const std::size_t first = d > 1 ? 1 : 0;
  const Vec probe = chart.embed(x0);
  Matrix j(probe.size(), d - first);
  for (std::size_t a = first; a < d; ++a) {
    const Vec fp = chart.embed(axpy(cfg.h, basis[a], x0));
    const Vec fm = chart.embed(axpy(-cfg.h, basis[a], x0));
    for (std::size_t i = 0; i < probe.size(); ++i) j(i, a - first) = (fp[i] - fm[i]) / (2.0 * cfg.h);
  }
  const SVD s = svd(j);
  return RauchEstimate{s.sigma.back(), s.sigma.front()};
}

HessianEstimate estimate_hessian(const ExpChart& chart, const std::vector<double>& v, double r,
                                 const FDConfig& cfg) {
  cfg.validate();
  constexpr double h2 = 1e-4;  // second-order stencil step
  const std::size_t d = chart.dim();
  const auto basis = basis_with_first(normalized(v), cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const Vec x0 = scaled(r, basis[0]);

  // Tangent frame at the image point and the unit radial direction there.
  const Matrix lifted_q = lifted_of(chart.spec(), chart.base(), chart.raw_of(x0));
  const Matrix frame = tangent_frame(ExpChart(chart.spec(), lifted_q), cfg.h);
  const Vec f0 = chart.embed(x0);
  const Vec gp = chart.embed(scaled(r + cfg.h, basis[0]));
  const Vec gm = chart.embed(scaled(r - cfg.h, basis[0]));
  const Vec radial = normalized(coords_in(frame, scaled(1.0 / (2.0 * cfg.h), axpy(-1.0, gm, gp))));

  auto second = [&](const Vec& dir) {
    const Vec fp = chart.embed(axpy(h2, dir, x0));
    const Vec fm = chart.embed(axpy(-h2, dir, x0));
    Vec acc(f0.size());
    for (std::size_t i = 0; i < f0.size(); ++i) acc[i] = (fp[i] - 2.0 * f0[i] + fm[i]) / (h2 * h2);
    return coords_in(frame, acc);
  };

  VectorForm full;
  full.m = d;
  full.t.assign(d * d, Vec());
  for (std::size_t a = 0; a < d; ++a) full.t[a * d + a] = second(basis[a]);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      const Vec sp = second(axpy(1.0, basis[b], basis[a]));
      const Vec sm = second(axpy(-1.0, basis[b], basis[a]));
      const Vec mixed = scaled(0.25, axpy(-1.0, sm, sp));
      full.t[a * d + b] = mixed;
      full.t[b * d + a] = mixed;
    }
  }

  const std::size_t first = d > 1 ? 1 : 0;
  const std::size_t m = d - first;
  VectorForm normal;
  normal.m = m;
  Matrix radial_form(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const Vec& t = full.at(a + first, b + first);
      const double rc = dot(t, radial);
      radial_form(a, b) = rc;
      normal.t.push_back(axpy(-rc, radial, t));
    }
  }
  const SymEig eig = sym_eig(sym_part(radial_form));

  HessianEstimate est;
  est.radial_min = eig.values.front();
  est.radial_max = eig.values.back();
  est.normal_max = max_norm(normal, cfg.probe_count, cfg.seed + 1);
  est.full_max = max_norm(full, cfg.probe_count, cfg.seed + 2);
  return est;
}

CheckReport rauch_check(const ManifoldSpec& spec, const Matrix& lifted_base,
                        const std::vector<double>& v, double r, const FDConfig& cfg, double tol) {
  CheckReport rep;
  rep.name = "rauch";
  rep.params = chart_params(spec, r);
  const auto profile = spec.curvature();
  if (!profile) {
    rep.skipped = true;
    rep.detail = "no stored curvature profile";
    return rep;
  }
  const RauchBounds b = rauch_bounds(*profile, r);
  const RauchEstimate e = estimate_rauch(ExpChart(spec, lifted_base), v, r, cfg);
  rep.estimate = e.min_gain;
  rep.bound = b.lower;
  rep.pass = e.min_gain >= b.lower - tol && e.max_gain <= b.upper + tol;
  rep.detail = "gain in [" + num(e.min_gain) + ", " + num(e.max_gain) + "] vs [" + num(b.lower) +
               ", " + num(b.upper) + "]";
  return rep;
}

std::vector<CheckReport> hess_exp_check(const ManifoldSpec& spec, const Matrix& lifted_base,
                                        const std::vector<double>& v, double r,
                                        const FDConfig& cfg, double tol) {
  const auto profile = spec.curvature();
  const std::string params = chart_params(spec, r);
  if (!profile) {
    CheckReport rep{"hess", params, 0.0, 0.0, false, true, "no stored curvature profile"};
    return {rep};
  }
  const HessianEstimate e = estimate_hessian(ExpChart(spec, lifted_base), v, r, cfg);
  const RadialBounds rb = hess_exp_radial_bounds(*profile, r);
  const double nb = hess_exp_normal_bound(*profile, r);
  const double fb = hess_exp_full_bound(*profile, r);

  std::vector<CheckReport> out;
  CheckReport radial{"hess_radial", params, e.radial_max, rb.hi, false, false, ""};
  radial.pass = e.radial_min >= rb.lo - tol && e.radial_max <= rb.hi + tol;
  radial.detail = "radial in [" + num(e.radial_min) + ", " + num(e.radial_max) + "] vs [" +
                  num(rb.lo) + ", " + num(rb.hi) + "]";
  out.push_back(radial);
  out.push_back(CheckReport{"hess_normal", params, e.normal_max, nb, e.normal_max <= nb + tol, false, ""});
  out.push_back(CheckReport{"hess_full", params, e.full_max, fb, e.full_max <= fb + tol, false, ""});
  return out;
}

// ---------------------------------------------------------------------------
// Retractions and flows

Retraction sphere_exp_retraction() {
  return [](const Matrix& p, const Matrix& v) {
    const double n = frobenius_norm(v);
    if (n == 0.0) return p;
    return std::cos(n) * p + (std::sin(n) / n) * v;
  };
}

Retraction sphere_projection_retraction() {
  return [](const Matrix& p, const Matrix& v) {
    const Matrix y = p + v;
    return (1.0 / frobenius_norm(y)) * y;
  };
}

Retraction so_exp_retraction() {
  return [](const Matrix& b, const Matrix& v) { return matmul(b, expm(matmul_tn(b, v))); };
}

Retraction so_cayley_retraction() {
  return [](const Matrix& b, const Matrix& v) {
    const Matrix a = matmul_tn(b, v);
    const Matrix id = Matrix::identity(a.rows());
    return matmul(b, solve(id - 0.5 * a, id + 0.5 * a));
  };
}

double flow_defect(const Retraction& retraction, const Matrix& p, const Matrix& v, double t,
                   double s, double h) {
  if (!(t > 0.0 && s > 0.0)) throw DomainError("flow_defect: t and s must be positive");
  auto velocity = [&](const Matrix& q, const Matrix& w, double tau) {
    return (1.0 / (2.0 * h)) * (retraction(q, (tau + h) * w) - retraction(q, (tau - h) * w));
  };
  const Matrix q = retraction(p, t * v);
  const Matrix w = velocity(p, v, t);
  return frobenius_norm(velocity(p, v, t + s) - velocity(q, w, s));
}

// ---------------------------------------------------------------------------
// Stiefel and Grassmannian cross-checks

namespace {

Matrix pskew(const Matrix& m) { return 0.5 * (m - m.transpose()); }

}  // namespace

bool stiefel_exp_qr(const Matrix& u, const Matrix& c, double t, Matrix& out) {
  require_same_shape(u, c, "stiefel_exp_qr");
  const std::size_t n = u.rows();
  const std::size_t k = u.cols();
  if (2 * k > n) throw ShapeError("stiefel_exp_qr: requires n >= 2k");
  const Matrix a = pskew(matmul_tn(u, c));
  const Matrix perp = c - matmul(u, matmul_tn(u, c));
  const QR f = qr(perp);
  double rmax = 0.0;
  double rmin = std::numeric_limits<double>::infinity();
  for (double x : f.r.diag()) {
    rmax = std::max(rmax, x);
    rmin = std::min(rmin, x);
  }
  if (rmax == 0.0 || rmin <= 1e-10 * std::max(1.0, rmax)) return false;
  Matrix big(2 * k, 2 * k);
  big.set_block(0, 0, t * a);
  big.set_block(0, k, -t * f.r.transpose());
  big.set_block(k, 0, t * f.r);
  const Matrix e = expm(big);
  Matrix uq(n, 2 * k);
  uq.set_block(0, 0, u);
  uq.set_block(0, k, f.q);
  out = matmul(uq, e.block(0, 0, 2 * k, k));
  return true;
}

namespace {

// Raw Stiefel coordinates (relative to the lift of U) of the tangent vector
// U pskew(UᵀC) + (I − UUᵀ)C, scaled by t.
Matrix stiefel_raw_for(const Matrix& lifted, const Matrix& u, const Matrix& c, double t) {
  const Matrix a = pskew(matmul_tn(u, c));
  const Matrix delta = matmul(u, a) + (c - matmul(u, matmul_tn(u, c)));
  return t * tril_strict(matmul_tn(lifted, delta));
}

}  // namespace

CheckReport stiefel_formula_crosscheck(const Matrix& u, const Matrix& c, const FDConfig& cfg,
                                       double tol) {
  (void)cfg;
  const ManifoldSpec spec = ManifoldSpec::stiefel(u.rows(), u.cols());
  CheckReport rep;
  rep.name = "stiefel_crosscheck";
  rep.params = spec.name();
  rep.bound = tol;
  if (max_abs(c) == 0.0) {
    rep.pass = true;
    rep.detail = "C = 0";
    return rep;
  }
  Matrix via_qr;
  if (!stiefel_exp_qr(u, c, 1.0, via_qr)) {
    rep.skipped = true;
    rep.detail = "(I - UU^T)C is rank deficient; QR formula not applicable";
    return rep;
  }
  const Matrix lifted = lift(spec, u);
  const Matrix via_lift = triv_stiefel(lifted, stiefel_raw_for(lifted, u, c, 1.0));
  rep.estimate = frobenius_norm(via_lift - via_qr);
  rep.pass = rep.estimate <= tol;
  return rep;
}

double submersion_commutation_defect(const Matrix& u, const Matrix& c,
                                     const std::vector<double>& t_grid) {
  const std::size_t n = u.rows();
  const std::size_t k = u.cols();
  const ManifoldSpec st = ManifoldSpec::stiefel(n, k);
  const Matrix lifted = lift(st, u);
  // Horizontal generator Ξ ∈ so(n): the m-part built from the tangent vector.
  Matrix raw_full(n, n);
  raw_full.set_block(0, 0, stiefel_raw_for(lifted, u, c, 1.0));
  const Matrix xi = frame_skew(raw_full);
  double worst = 0.0;
  for (double t : t_grid) {
    const Matrix g = matmul(lifted, expm(t * xi)).block(0, 0, n, k);
    Matrix ref;
    if (!stiefel_exp_qr(u, c, t, ref)) {
      if (t == 0.0) {
        ref = u;
      } else {
        throw DomainError("submersion_commutation_defect: rank-deficient direction");
      }
    }
    worst = std::max(worst, frobenius_norm(g - ref));
  }
  return worst;
}

Matrix grassmann_exp_svd(const Matrix& u, const Matrix& delta) {
  require_same_shape(u, delta, "grassmann_exp_svd");
  const SVD s = svd(delta);
  const std::size_t k = u.cols();
  std::vector<double> c(k), sn(k);
  for (std::size_t i = 0; i < k; ++i) {
    c[i] = std::cos(s.sigma[i]);
    sn[i] = std::sin(s.sigma[i]);
  }
  const Matrix y = matmul(matmul(u, s.v), Matrix::diagonal(c)) + matmul(s.u, Matrix::diagonal(sn));
  return matmul_nt(y, s.v);
}

double subspace_distance(const Matrix& y1, const Matrix& y2) {
  require_same_shape(y1, y2, "subspace_distance");
  return frobenius_norm(y2 - matmul(y1, matmul_tn(y1, y2)));
}

// ---------------------------------------------------------------------------
// Gradient pullback check

CheckReport pullback_check(const ManifoldSpec& spec, std::uint64_t seed, int configs, double tol) {
  CheckReport rep;
  rep.name = "pullback";
  rep.params = spec.name() + " configs=" + std::to_string(configs);
  rep.bound = tol;
  const auto parts = spec.components();
  Rng rng(seed);
  double worst = 0.0;
  constexpr double h = 1e-5;
  for (int c = 0; c < configs; ++c) {
    Tuple lifted, raw, m_lin, n_quad;
    for (const auto& p : parts) {
      const Matrix point = random_point(p, rng);
      lifted.push_back(lift(p, point));
      const Shape rs = p.raw_shape();
      std::uniform_real_distribution<double> scale(0.3, p.kind() == ManifoldKind::SPD ? 0.5 : 1.5);
      Matrix r = gaussian_matrix(rs.rows, rs.cols, rng);
      r *= scale(rng) / std::max(frobenius_norm(r), 1e-300);
      raw.push_back(std::move(r));
      const Shape ps = p.point_shape();
      m_lin.push_back(gaussian_matrix(ps.rows, ps.cols, rng));
      n_quad.push_back(gaussian_matrix(ps.cols, ps.cols, rng));
    }
    // f(X) = Σ ⟨M_i, X_i⟩ + ½‖X_i N_i‖²
    auto f = [&](const Tuple& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double q = frobenius_norm(matmul(x[i], n_quad[i]));
        s += frobenius_inner(m_lin[i], x[i]) + 0.5 * q * q;
      }
      return s;
    };
    const Tuple x = triv_tuple(spec, lifted, raw);
    Tuple g;
    for (std::size_t i = 0; i < x.size(); ++i) {
      g.push_back(m_lin[i] + matmul(x[i], matmul_nt(n_quad[i], n_quad[i])));
    }
    const Tuple analytic = pullback_grad_tuple(spec, lifted, raw, g);

    double diff2 = 0.0;
    double ref2 = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      for (std::size_t e = 0; e < raw[i].size(); ++e) {
        Tuple rp = raw, rm = raw;
        rp[i].data()[e] += h;
        rm[i].data()[e] -= h;
        const double fd = (f(triv_tuple(spec, lifted, rp)) - f(triv_tuple(spec, lifted, rm))) / (2.0 * h);
        const double an = analytic[i].data()[e];
        diff2 += (fd - an) * (fd - an);
        ref2 += an * an;
      }
    }
    worst = std::max(worst, std::sqrt(diff2) / std::max(std::sqrt(ref2), 1e-12));
  }
  rep.estimate = worst;
  rep.pass = worst <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Suite

namespace {

unsigned thread_count(unsigned requested) {
  unsigned t = requested;
  if (t == 0) {
    if (const char* env = std::getenv("TRIVOPT_THREADS")) t = static_cast<unsigned>(std::atoi(env));
  }
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  return t;
}

bool selected(const VerifyOptions& o, const std::string& name) {
  if (o.only.empty()) return true;
  return std::any_of(o.only.begin(), o.only.end(),
                     [&](const std::string& p) { return name.rfind(p, 0) == 0; });
}

Vec random_unit(std::size_t d, Rng& rng) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (double& x : v) x = g(rng);
  return normalized(v);
}

}  // namespace

std::vector<CheckReport> run_verify_suite(const VerifyOptions& opts) {
  opts.fd.validate();
  const double ts = opts.tolerance_scale;
  using Task = std::function<std::vector<CheckReport>()>;
  std::vector<Task> tasks;

  const std::vector<ManifoldSpec> grid_specs = {
      ManifoldSpec::special_orthogonal(2), ManifoldSpec::special_orthogonal(3),
      ManifoldSpec::special_orthogonal(4), ManifoldSpec::sphere(3),
      ManifoldSpec::grassmannian(4, 2)};
  std::uint64_t seed = opts.seed;
  for (const auto& spec : grid_specs) {
    const CurvatureProfile p = *spec.curvature();
    // The second-order bounds assume v lies in the segment domain, so the
    // injectivity radius caps the grid as well.
    const double domain =
        std::min({pi_kappa(p.Delta), second_order_domain(p).radius_limit, p.inj});
    for (double r : {0.1, 0.5, 1.0, std::min(2.0, 0.9 * domain)}) {
      const std::uint64_t s = ++seed;
      FDConfig fd = opts.fd;
      fd.seed = s;
      if (selected(opts, "rauch")) {
        tasks.push_back([spec, r, s, fd, ts] {
          const Matrix base = lift(spec, random_point(spec, s));
          Rng rng(s);
          const Vec v = random_unit(ExpChart(spec, base).dim(), rng);
          return std::vector<CheckReport>{rauch_check(spec, base, v, r, fd, 1e-4 * ts)};
        });
      }
      if (selected(opts, "hess")) {
        tasks.push_back([spec, r, s, fd, ts] {
          const Matrix base = lift(spec, random_point(spec, s));
          Rng rng(s);
          const Vec v = random_unit(ExpChart(spec, base).dim(), rng);
          return hess_exp_check(spec, base, v, r, fd, 1e-3 * ts);
        });
      }
    }
  }

  if (selected(opts, "flow")) {
    tasks.push_back([ts, seed = opts.seed] {
      std::vector<CheckReport> out;
      Rng rng(seed + 101);
      // Sphere(3) as the unit sphere in R^3.
      Matrix p = unit_gaussian_matrix(3, 1, rng);
      Matrix v = gaussian_matrix(3, 1, rng);
      v -= frobenius_inner(p, v) * p;
      v *= 1.0 / frobenius_norm(v);
      const ManifoldSpec so3 = ManifoldSpec::special_orthogonal(3);
      const Matrix b = random_point(so3, rng);
      const Matrix a = frame_skew(gaussian_matrix(3, 3, rng));
      const Matrix bv = matmul(b, (1.0 / frobenius_norm(a)) * a);
      const double t = 0.7, s = 0.5;
      const double e1 = flow_defect(sphere_exp_retraction(), p, v, t, s);
      const double e2 = flow_defect(so_exp_retraction(), b, bv, t, s);
      const double e3 = flow_defect(so_cayley_retraction(), b, bv, t, s);
      const double e4 = flow_defect(sphere_projection_retraction(), p, v, t, s);
      const std::string prm = "t=0.7 s=0.5";
      out.push_back({"flow_exp_sphere", "Sphere(3) " + prm, e1, 1e-6 * ts, e1 <= 1e-6 * ts, false, "expected flow"});
      out.push_back({"flow_exp_so3", "SO(3) " + prm, e2, 1e-6 * ts, e2 <= 1e-6 * ts, false, "expected flow"});
      out.push_back({"flow_cayley_so3", "SO(3) " + prm, e3, 1e-3, e3 > 1e-3, false, "expected no flow"});
      out.push_back({"flow_projection_sphere", "Sphere(3) " + prm, e4, 1e-3, e4 > 1e-3, false, "expected no flow"});
      return out;
    });
  }

  if (selected(opts, "stiefel_crosscheck") || selected(opts, "submersion")) {
    const bool cross = selected(opts, "stiefel_crosscheck");
    const bool sub = selected(opts, "submersion");
    tasks.push_back([ts, cross, sub, fd = opts.fd, seed = opts.seed] {
      std::vector<CheckReport> out;
      const ManifoldSpec st = ManifoldSpec::stiefel(6, 2);
      Rng rng(seed + 202);
      const Matrix u = random_point(st, rng);
      const Matrix c = gaussian_matrix(6, 2, rng);
      if (cross) out.push_back(stiefel_formula_crosscheck(u, c, fd, 1e-9 * ts));
      if (sub) {
        std::vector<double> grid;
        for (int i = 0; i < 20; ++i) grid.push_back(i / 19.0);
        const double d = submersion_commutation_defect(u, c, grid);
        out.push_back({"submersion", "SO(6)->St(6,2) 20 points", d, 1e-10 * ts, d <= 1e-10 * ts, false, ""});
      }
      return out;
    });
  }

  if (selected(opts, "pullback")) {
    const std::vector<ManifoldSpec> shipped = {
        ManifoldSpec::special_orthogonal(4), ManifoldSpec::stiefel(5, 2),
        ManifoldSpec::grassmannian(5, 2),    ManifoldSpec::sphere(4),
        ManifoldSpec::spd(3),                ManifoldSpec::euclidean(3, 2),
        ManifoldSpec::product({ManifoldSpec::special_orthogonal(3), ManifoldSpec::spd(2)})};
    for (std::size_t i = 0; i < shipped.size(); ++i) {
      tasks.push_back([spec = shipped[i], s = opts.seed + 300 + i, ts] {
        return std::vector<CheckReport>{pullback_check(spec, s, 20, 1e-6 * ts)};
      });
    }
  }

  std::vector<std::vector<CheckReport>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = tasks[i]();
      } catch (const std::exception& e) {
        results[i] = {CheckReport{"error", "task " + std::to_string(i), 0.0, 0.0, false, false, e.what()}};
      }
    }
  };
  const unsigned nt = std::min<unsigned>(thread_count(opts.threads), static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<CheckReport> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

}  // namespace trivopt
