#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trivopt/curvature.hpp"
#include "trivopt/dense/matrix.hpp"
#include "trivopt/random.hpp"

namespace trivopt {

enum class ManifoldKind { SpecialOrthogonal, Stiefel, Grassmannian, SPD, Sphere, Euclidean, Product };

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Description of a manifold together with its trivialisation.
//
// Every component keeps a "lifted" base: for SO(n) the point itself, for the
// Stiefel family (Stiefel, Grassmannian, Sphere) an n×n rotation whose first k
// columns are the point, for SPD the point, for Euclidean factors the value.
// Raw coordinates are unconstrained matrices of raw_shape().
class ManifoldSpec {
 public:
  static ManifoldSpec special_orthogonal(std::size_t n);
  static ManifoldSpec stiefel(std::size_t n, std::size_t k);
  static ManifoldSpec grassmannian(std::size_t n, std::size_t k);
  static ManifoldSpec spd(std::size_t n);
  // Unit sphere in R^n, realised as St(n, 1).
  static ManifoldSpec sphere(std::size_t n);
  static ManifoldSpec euclidean(std::size_t rows, std::size_t cols);
  static ManifoldSpec product(std::vector<ManifoldSpec> components);

  ManifoldKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  bool is_product() const noexcept { return kind_ == ManifoldKind::Product; }
  // Uses the lifted-through-SO(n) construction.
  bool is_stiefel_family() const noexcept;

  Shape raw_shape() const;
  Shape point_shape() const;
  Shape lifted_shape() const;

  // Stored bounded-geometry constants, in the metric the raw frame induces up
  // to frame_gain(). Absent for Stiefel and SPD, whose constants depend on the
  // problem.
  std::optional<CurvatureProfile> curvature() const;

  // Ratio between the Riemannian norm of frame(E) and the Euclidean norm of
  // the raw coordinate E on the active entries: √2 for SO(n), 1 otherwise.
  double frame_gain() const;

  // Components of a product; a single-element list holding *this otherwise.
  std::vector<ManifoldSpec> components() const;
  std::size_t component_count() const;

  std::string name() const;

 private:
  ManifoldSpec(ManifoldKind kind, std::size_t n, std::size_t k);

  ManifoldKind kind_;
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<ManifoldSpec> parts_;
};

// Multi-component values (one Matrix per product component).
using Tuple = std::vector<Matrix>;

// A ↦ tril(A, −1) − tril(A, −1)ᵀ.
Matrix frame_skew(const Matrix& x);
// Strictly lower triangular part; the raw coordinates of a skew matrix.
Matrix tril_strict(const Matrix& x);

// Throws ConstraintError unless `point` lies on the manifold within `tol`.
void check_point(const ManifoldSpec& spec, const Matrix& point, double tol = 1e-9);

// Lifted base for a point: completes Stiefel-family points to an element of
// SO(n) deterministically; identity map otherwise.
Matrix lift(const ManifoldSpec& spec, const Matrix& point);
// Point represented by a lifted base.
Matrix project(const ManifoldSpec& spec, const Matrix& lifted);

// Mask of raw entries the trivialisation depends on (1) or ignores (0).
Matrix active_raw_mask(const ManifoldSpec& spec);

// Point reached from the lifted base along raw coordinates X.
Matrix triv(const ManifoldSpec& spec, const Matrix& lifted, const Matrix& raw);
// Lifted base of that point (used when the basepoint moves).
Matrix triv_lifted(const ManifoldSpec& spec, const Matrix& lifted, const Matrix& raw);

// Gradient of f∘triv(lifted, ·) at raw, given the ambient gradient of f at
// triv(lifted, raw).
Matrix pullback_grad(const ManifoldSpec& spec, const Matrix& lifted, const Matrix& raw,
                     const Matrix& ambient_grad);

// Named per-manifold maps.
Matrix triv_so(const Matrix& base, const Matrix& raw);
Matrix triv_stiefel(const Matrix& lifted_base, const Matrix& raw);
Matrix triv_grassmann(const Matrix& lifted_base, const Matrix& raw);
Matrix triv_spd(const Matrix& base, const Matrix& raw);

// π_B(M) = ½(M − B Mᵀ B).
Matrix tangent_project_so(const Matrix& base, const Matrix& m);

// Haar sample for SO(n) and the Stiefel family; V Λ Vᵀ with log-uniform
// eigenvalues in [0.5, 2] for SPD; standard Gaussian for Euclidean factors.
Matrix random_point(const ManifoldSpec& spec, Rng& rng);
Matrix random_point(const ManifoldSpec& spec, std::uint64_t seed);
Tuple random_tuple(const ManifoldSpec& spec, std::uint64_t seed);

// Skew block-diagonal matrix with 2×2 blocks [[0, −s], [s, 0]], s ~ U[−π, π].
Matrix henaff_init(std::size_t n, std::uint64_t seed);

// Componentwise maps over a product (a non-product spec is a singleton).
Tuple triv_tuple(const ManifoldSpec& spec, const Tuple& lifted, const Tuple& raw);
Tuple triv_lifted_tuple(const ManifoldSpec& spec, const Tuple& lifted, const Tuple& raw);
Tuple pullback_grad_tuple(const ManifoldSpec& spec, const Tuple& lifted, const Tuple& raw,
                          const Tuple& ambient_grad);
Tuple lift_tuple(const ManifoldSpec& spec, const Tuple& points);
Tuple zero_raw_tuple(const ManifoldSpec& spec);

// Euclidean norm of a tuple.
double tuple_norm(const Tuple& t);

}  // namespace trivopt
