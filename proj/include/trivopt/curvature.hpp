#pragma once

#include <limits>

namespace trivopt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounded-geometry constants: sectional curvature in [delta, Delta], covariant
// derivative of the curvature tensor bounded by Lambda, injectivity radius inj.
struct CurvatureProfile {
  double delta = 0.0;
  double Delta = 0.0;
  double Lambda = 0.0;
  double inj = kInf;

  // Throws ContractError unless delta ≤ Delta, Lambda ≥ 0 and inj > 0.
  void validate() const;
};

CurvatureProfile flat_profile();
CurvatureProfile constant_curvature_profile(double kappa);

struct BoundDomain {
  double radius_limit = kInf;
};

// Generalised sine: the solution of x'' + κx = 0 with x(0) = 0, x'(0) = 1.
double sn(double kappa, double t);
// Its derivative, the generalised cosine.
double cs(double kappa, double t);
// First positive zero of sn_κ (+∞ when κ ≤ 0).
double pi_kappa(double kappa);
// sn'/sn on (0, π_κ); DomainError outside.
double ct(double kappa, double t);

struct RauchBounds {
  double lower = 1.0;
  double upper = 1.0;
  BoundDomain domain;  // lower is valid for r ≤ π_Δ
};

// Bounds on ‖(d exp_p)_{rv}(w)‖ / ‖w‖ for w normal to the unit vector v.
RauchBounds rauch_bounds(const CurvatureProfile& profile, double r);

struct RadialBounds {
  double lo = 0.0;
  double hi = 0.0;
};

// Range of ⟨(∇ d exp_p)(w, w), γ̇⟩ per unit ‖w‖² for w normal to γ̇, at radius r.
RadialBounds hess_exp_radial_bounds(const CurvatureProfile& profile, double r);

// Upper bound on the normal component of (∇ d exp_p)(w, w) per unit ‖w‖².
double hess_exp_normal_bound(const CurvatureProfile& profile, double r);

// Upper bound on the whole of ‖(∇ d exp_p)(w, w)‖ per unit ‖w‖².
double hess_exp_full_bound(const CurvatureProfile& profile, double r);

// Radius below which the normal and full bounds hold: π_{(Δ+δ)/2}.
BoundDomain second_order_domain(const CurvatureProfile& profile);

// Both second-order bounds at one radius, kept side by side because they use
// different curvature terms (Δ − δ versus max{|Δ|, |δ|}).
struct HessianBoundSummary {
  double normal_part = 0.0;
  double full = 0.0;
};
HessianBoundSummary hessian_bound_summary(const CurvatureProfile& profile, double r);

// Hessian constant of f ∘ exp_p on a ball of radius r when f is α-smooth.
double alpha_hat(const CurvatureProfile& profile, double alpha, double r);

struct Zetas {
  double zeta1 = 1.0;  // max{1, r ct_κ(r)}
  double zeta2 = 1.0;  // min{1, r ct_κ(r)}
};
Zetas law_of_cosines_zetas(double kappa, double r);

// Step size 1/α̂_{R/2} that guarantees descent on a region of diameter R.
double step_size(const CurvatureProfile& profile, double alpha, double R);

}  // namespace trivopt
