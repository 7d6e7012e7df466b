#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trivopt/dense/matrix.hpp"
#include "trivopt/manifolds.hpp"

namespace trivopt {

struct FDConfig {
  double h = 1e-5;
  int probe_count = 32;
  std::uint64_t seed = 0;

  void validate() const;  // 0 < h < 1e-2, probe_count ≥ 1
};

using MatrixMap = std::function<Matrix(const Matrix&)>;

// (map(X + hE) − map(X − hE)) / 2h
Matrix fd_directional(const MatrixMap& map, const Matrix& x, const Matrix& e, const FDConfig& cfg);

// One line of a verification report.
struct CheckReport {
  std::string name;
  std::string params;
  double estimate = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string detail;

  // "name | params | estimate | bound | PASS" (or FAIL / SKIP)
  std::string line() const;
};

// Riemannian-normal coordinates u ∈ R^d around a base point, mapped through an
// isometric embedding of the manifold into Euclidean space. Supports SO(n)
// and the Stiefel family.
class ExpChart {
 public:
  ExpChart(const ManifoldSpec& spec, const Matrix& lifted_base);

  std::size_t dim() const noexcept { return basis_.size(); }
  // Raw coordinates of Σ u_i e_i, with e_i an orthonormal tangent basis.
  Matrix raw_of(const std::vector<double>& u) const;
  // Embedded image of exp_p(Σ u_i e_i).
  std::vector<double> embed(const std::vector<double>& u) const;
  // Embedding of a point given in lifted form.
  std::vector<double> embed_lifted(const Matrix& lifted) const;

  const ManifoldSpec& spec() const noexcept { return spec_; }
  const Matrix& base() const noexcept { return base_; }

 private:
  ManifoldSpec spec_;
  Matrix base_;
  std::vector<Matrix> basis_;  // raw matrices of unit Riemannian norm
};

// Isometric embedding Φ of a point (SO: Q; Sphere: x; Stiefel: (U/√2, UUᵀ/2);
// Grassmannian: UUᵀ/√2), flattened.
std::vector<double> isometric_embedding(const ManifoldSpec& spec, const Matrix& point);

// Estimates of first- and second-order behaviour of exp_p at r·v.
struct RauchEstimate {
  double min_gain = 0.0;  // min over unit normal w of ‖(d exp)_{rv}(w)‖
  double max_gain = 0.0;
};

struct HessianEstimate {
  double radial_min = 0.0;  // extremes of ⟨∇d exp(w, w), γ̇⟩ over unit normal w
  double radial_max = 0.0;
  double normal_max = 0.0;  // sup ‖normal part of ∇d exp(w, w)‖, unit normal w
  double full_max = 0.0;    // sup ‖∇d exp(w, w)‖, unit w
};

RauchEstimate estimate_rauch(const ExpChart& chart, const std::vector<double>& v, double r,
                             const FDConfig& cfg);
HessianEstimate estimate_hessian(const ExpChart& chart, const std::vector<double>& v, double r,
                                 const FDConfig& cfg);

// Checks the Rauch sandwich with a 1e-4 slack; v is a unit vector in chart
// coordinates.
CheckReport rauch_check(const ManifoldSpec& spec, const Matrix& lifted_base,
                        const std::vector<double>& v, double r, const FDConfig& cfg,
                        double tol = 1e-4);

// Radial, normal and full second-order checks (1e-3 absolute slack).
std::vector<CheckReport> hess_exp_check(const ManifoldSpec& spec, const Matrix& lifted_base,
                                        const std::vector<double>& v, double r,
                                        const FDConfig& cfg, double tol = 1e-3);

// A retraction maps (point, ambient tangent vector) to a point.
using Retraction = std::function<Matrix(const Matrix& p, const Matrix& v)>;

Retraction sphere_exp_retraction();
Retraction sphere_projection_retraction();
Retraction so_exp_retraction();
Retraction so_cayley_retraction();

// ‖γ̇_{p,v}(t+s) − γ̇_{γ(t), γ̇(t)}(s)‖_F with velocities by central differences.
double flow_defect(const Retraction& retraction, const Matrix& p, const Matrix& v, double t,
                   double s, double h = 1e-5);

// Stiefel exponential by the 2k×2k QR-reduced formula, with Δ the tangent
// projection U pskew(UᵀC) + (I − UUᵀ)C. Returns false when (I − UUᵀ)C is
// rank deficient.
bool stiefel_exp_qr(const Matrix& u, const Matrix& c, double t, Matrix& out);

// Compares the lifted Stiefel map against stiefel_exp_qr (agreement ≤ 1e-9).
CheckReport stiefel_formula_crosscheck(const Matrix& u, const Matrix& c, const FDConfig& cfg,
                                       double tol = 1e-9);

// Largest distance over t ∈ grid between the first k columns of the SO(n)
// geodesic Ū exp(tΞ) with horizontal Ξ built from C, and the Stiefel
// geodesic from the QR formula.
double submersion_commutation_defect(const Matrix& u, const Matrix& c,
                                     const std::vector<double>& t_grid);

// Grassmannian geodesic from the SVD of a horizontal Δ (UᵀΔ = 0).
Matrix grassmann_exp_svd(const Matrix& u, const Matrix& delta);

// ‖(I − Y1Y1ᵀ)Y2‖_F: the root sum of squared sines of the principal angles.
double subspace_distance(const Matrix& y1, const Matrix& y2);

// Compares pullback_grad with a central-difference gradient of f∘triv for a
// random smooth objective; `configs` random (base, raw) pairs.
CheckReport pullback_check(const ManifoldSpec& spec, std::uint64_t seed, int configs,
                           double tol = 1e-6);

struct VerifyOptions {
  std::vector<std::string> only;  // check-name prefixes; empty runs all
  double tolerance_scale = 1.0;   // multiplies every slack (tests inject < 1)
  unsigned threads = 0;           // 0: TRIVOPT_THREADS or hardware concurrency
  std::uint64_t seed = 0;
  FDConfig fd;
};

// The shipped-manifold × radius grid plus the structural checks.
std::vector<CheckReport> run_verify_suite(const VerifyOptions& opts);

}  // namespace trivopt
