#include "trivopt/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "trivopt/errors.hpp"

namespace trivopt {
namespace {

constexpr double kSeriesSwitch = 1e-8;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require_positive_radius(double r, const char* what) {
  if (!(r > 0.0)) throw DomainError(std::string(what) + ": radius must be positive, got " + fmt(r));
}

void require_below(double r, double limit, const char* what) {
  if (!(r < limit)) {
    throw DomainError(std::string(what) + ": radius " + fmt(r) + " outside validity domain (limit " +
                      fmt(limit) + ")");
  }
}

// Shared factor (8/3) sn_δ(r/2)² (Λ sn_δ(r/2)² + 2 max{|Δ|,|δ|} sn_δ(r)).
double full_constant(const CurvatureProfile& p, double r) {
  const double h = sn(p.delta, r / 2.0);
  const double m = std::max(std::abs(p.Delta), std::abs(p.delta));
  return (8.0 / 3.0) * h * h * (p.Lambda * h * h + 2.0 * m * sn(p.delta, r));
}

}  // namespace

void CurvatureProfile::validate() const {
  if (!(delta <= Delta)) throw ContractError("CurvatureProfile: requires delta <= Delta");
  if (!(Lambda >= 0.0)) throw ContractError("CurvatureProfile: requires Lambda >= 0");
  if (!(inj > 0.0)) throw ContractError("CurvatureProfile: requires inj > 0");
}

CurvatureProfile flat_profile() { return CurvatureProfile{0.0, 0.0, 0.0, kInf}; }

CurvatureProfile constant_curvature_profile(double kappa) {
  return CurvatureProfile{kappa, kappa, 0.0, pi_kappa(kappa)};
}

double sn(double kappa, double t) {
  const double x = kappa * t * t;
  if (std::abs(x) < kSeriesSwitch) return t * (1.0 - x / 6.0 + x * x / 120.0);
  if (kappa > 0.0) {
    const double s = std::sqrt(kappa);
    return std::sin(s * t) / s;
  }
  const double s = std::sqrt(-kappa);
  return std::sinh(s * t) / s;
}

double cs(double kappa, double t) {
  const double x = kappa * t * t;
  if (std::abs(x) < kSeriesSwitch) return 1.0 - x / 2.0 + x * x / 24.0;
  if (kappa > 0.0) return std::cos(std::sqrt(kappa) * t);
  return std::cosh(std::sqrt(-kappa) * t);
}

double pi_kappa(double kappa) {
  return kappa > 0.0 ? std::numbers::pi / std::sqrt(kappa) : kInf;
}

double ct(double kappa, double t) {
  if (!(t > 0.0) || !(t < pi_kappa(kappa))) {
    throw DomainError("ct: t = " + fmt(t) + " outside (0, pi_kappa)");
  }
  return cs(kappa, t) / sn(kappa, t);
}

RauchBounds rauch_bounds(const CurvatureProfile& profile, double r) {
  require_positive_radius(r, "rauch_bounds");
  RauchBounds b;
  b.lower = std::min(1.0, sn(profile.Delta, r) / r);
  b.upper = std::max(1.0, sn(profile.delta, r) / r);
  b.domain.radius_limit = pi_kappa(profile.Delta);
  return b;
}

RadialBounds hess_exp_radial_bounds(const CurvatureProfile& profile, double r) {
  require_positive_radius(r, "hess_exp_radial_bounds");
  require_below(r, pi_kappa(profile.Delta), "hess_exp_radial_bounds");
  const double r2 = r * r;
  return RadialBounds{1.0 / r - sn(4.0 * profile.delta, r) / r2,
                      1.0 / r - sn(4.0 * profile.Delta, r) / r2};
}

BoundDomain second_order_domain(const CurvatureProfile& profile) {
  return BoundDomain{pi_kappa(0.5 * (profile.Delta + profile.delta))};
}

double hess_exp_normal_bound(const CurvatureProfile& profile, double r) {
  require_positive_radius(r, "hess_exp_normal_bound");
  require_below(r, second_order_domain(profile).radius_limit, "hess_exp_normal_bound");
  const double h = sn(profile.delta, r / 2.0);
  const double gap = profile.Delta - profile.delta;
  return (8.0 / (9.0 * r * r)) * h * h *
         (3.0 * profile.Lambda * h * h + 2.0 * gap * sn(profile.delta, r));
}

double hess_exp_full_bound(const CurvatureProfile& profile, double r) {
  require_positive_radius(r, "hess_exp_full_bound");
  require_below(r, second_order_domain(profile).radius_limit, "hess_exp_full_bound");
  return full_constant(profile, r) / (r * r);
}

HessianBoundSummary hessian_bound_summary(const CurvatureProfile& profile, double r) {
  return HessianBoundSummary{hess_exp_normal_bound(profile, r), hess_exp_full_bound(profile, r)};
}

double alpha_hat(const CurvatureProfile& profile, double alpha, double r) {
  require_positive_radius(r, "alpha_hat");
  require_below(r, second_order_domain(profile).radius_limit, "alpha_hat");
  if (!(alpha >= 0.0)) throw DomainError("alpha_hat: alpha must be non-negative");
  const double s = sn(profile.delta, r) / r;
  const double c1 = std::max(1.0, s * s);
  return alpha * (c1 + full_constant(profile, r));
}

Zetas law_of_cosines_zetas(double kappa, double r) {
  const double v = r * ct(kappa, r);
  return Zetas{std::max(1.0, v), std::min(1.0, v)};
}

double step_size(const CurvatureProfile& profile, double alpha, double R) {
  const double a = alpha_hat(profile, alpha, R / 2.0);
  return a > 0.0 ? 1.0 / a : kInf;
}

}  // namespace trivopt
