#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trivopt/manifolds.hpp"
#include "trivopt/trivialize.hpp"

namespace trivopt {

// A known global minimiser, computed independently of any optimiser.
struct Optimum {
  double value = 0.0;
  Tuple point;
};

// An objective on a manifold with an analytic ambient gradient.
//
// The gradient is checked against central differences at construction (three
// random points, relative 1e-6), so a Problem in hand is known to be coherent.
struct Problem {
  std::string name;
  ManifoldSpec spec = ManifoldSpec::euclidean(1, 1);
  Objective objective;
  Tuple initial;                  // deterministic starting point
  std::optional<Optimum> oracle;  // absent when no closed form is known
  double ambient_hessian_bound = 0.0;  // α with ‖∇²f‖ ≤ α near the feasible set, 0 if unknown

  double value(const Tuple& x) const { return objective(x).value; }
};

// Largest relative mismatch between ⟨grad f, E⟩ and the central difference of f
// along E, over `points` random points and directions. SPD components get
// symmetric directions so the perturbed point stays in the domain.
double gradient_check(const ManifoldSpec& spec, const Objective& objective, std::uint64_t seed,
                      int points = 3, double h = 1e-5);

// f(Q) = ‖QA − B‖_F² on SO(n).
Problem procrustes(const Matrix& a, const Matrix& b);

// f(x) = xᵀ A x on the unit sphere, A symmetric.
Problem rayleigh(const Matrix& a_sym);

// f(P) = Σ d(P, A_i)² with the affine-invariant distance on SPD(n).
// The oracle is available for one or two points.
Problem karcher_spd(const std::vector<Matrix>& points);

// f(U) = −tr(Uᵀ A U) on Gr(n, k): the leading k-dimensional eigenspace.
Problem pca_grassmann(const Matrix& a_sym, std::size_t k);

// f(U) = tr(Uᵀ A U N) on St(n, k) with N = diag(k, …, 1).
Problem brockett(const Matrix& a_sym, std::size_t k);

// f(X) = ½‖X − T‖_F² on a Euclidean factor. Mostly useful to exercise the
// optimisers and the divergence guard.
Problem quadratic(const Matrix& target);

// Geodesic midpoint A #_{1/2} B = A^{1/2}(A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
Matrix spd_midpoint(const Matrix& a, const Matrix& b);

// Affine-invariant distance ‖log(A^{-1/2} B A^{-1/2})‖_F.
double spd_distance(const Matrix& a, const Matrix& b);

// Random instances with fixed seeds, used by the CLI and the tests.
Problem random_procrustes(std::size_t n, std::uint64_t seed);
// A = Q diag(1, …, n) Qᵀ with Haar Q.
Problem random_rayleigh(std::size_t n, std::uint64_t seed);
Problem random_karcher(std::size_t n, std::size_t count, std::uint64_t seed);
Problem random_pca(std::size_t n, std::size_t k, std::uint64_t seed);
Problem random_brockett(std::size_t n, std::size_t k, std::uint64_t seed);
Problem random_quadratic(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace trivopt
