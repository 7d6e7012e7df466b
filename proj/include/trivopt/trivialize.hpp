#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trivopt/manifolds.hpp"
#include "trivopt/optimizers.hpp"

namespace trivopt {

// When to move the trivialisation basepoint to the current iterate.
struct StoppingRule {
  enum class Kind { Never, Always, EveryK, GradRatio };

  Kind kind = Kind::Never;
  std::uint64_t k = 1;     // EveryK: accepted steps per basepoint
  double eps_low = 0.1;    // GradRatio: fire when ratio < eps_low ...
  double eps_high = 10.0;  // ... or ratio > eps_high

  static StoppingRule never();
  static StoppingRule always();
  static StoppingRule every_k(std::uint64_t k);
  static StoppingRule grad_ratio(double eps_low = 0.1, double eps_high = 10.0);

  void validate() const;
};

StoppingRule::Kind parse_rule_kind(const std::string& name);
std::string to_string(StoppingRule::Kind kind);

// Value of the objective and its Euclidean gradient at each component point.
struct Evaluation {
  double value = 0.0;
  Tuple gradients;
};

using Objective = std::function<Evaluation(const Tuple& points)>;

struct StepRecord {
  std::uint64_t iter = 0;
  double f_value = 0.0;
  double grad_norm_raw = 0.0;          // ‖∇(f∘triv)(raw)‖
  double grad_norm_riemannian = 0.0;   // ‖grad f(x)‖ in the frame metric at x
  double grad_ratio = 1.0;
  bool stop_fired = false;
  std::uint64_t outer_i = 0;           // basepoint index the step ran under
};

using Trace = std::vector<StepRecord>;

// State of a dynamic trivialisation run over a (possibly product) manifold.
//
// Basepoints are held in lifted form (see ManifoldSpec). Raw coordinates start
// at zero and are reset to zero whenever the basepoint moves, at which point
// the optimisers of the non-Euclidean components are reset as well.
class TrivRun {
 public:
  // One optimiser config per component, or a single config shared by all.
  TrivRun(ManifoldSpec spec, const Tuple& initial_points, std::vector<OptimizerConfig> optimizers,
          StoppingRule rule);

  // Evaluate, pull back, update raw, then apply the stopping rule.
  // Throws DivergenceError when the objective is non-finite or above 1e12.
  StepRecord step(const Objective& objective);

  // Current iterate triv(base, raw), memoised until raw or base change.
  const Tuple& cached_eval();
  // Lifted form of the current iterate.
  const Tuple& cached_lifted();

  // ‖∇(f∘triv)(raw)‖ / ‖grad f(x)‖ at the current iterate (1 if the
  // denominator is below 1e-15).
  double grad_ratio(const Objective& objective);

  // Moves the basepoint to the current iterate.
  void rebase();

  void set_raw(const Tuple& raw);

  const ManifoldSpec& spec() const noexcept { return spec_; }
  const Tuple& base() const noexcept { return base_; }
  Tuple base_points() const;
  const Tuple& raw() const noexcept { return raw_; }
  const StoppingRule& rule() const noexcept { return rule_; }
  std::vector<Optimizer>& optimizers() noexcept { return opts_; }

  std::uint64_t outer() const noexcept { return outer_; }
  std::uint64_t inner() const noexcept { return inner_; }
  std::uint64_t iterations() const noexcept { return iter_; }
  std::uint64_t version() const noexcept { return version_; }
  // Number of times triv(base, raw) has actually been computed.
  std::uint64_t eval_count() const noexcept { return evals_; }

 private:
  void touch() noexcept { ++version_; }
  Tuple riemannian_gradient(const Tuple& ambient);

  ManifoldSpec spec_;
  std::vector<ManifoldSpec> parts_;
  Tuple base_;
  Tuple raw_;
  std::vector<Optimizer> opts_;
  StoppingRule rule_;

  std::uint64_t outer_ = 0;
  std::uint64_t inner_ = 0;
  std::uint64_t iter_ = 0;
  std::uint64_t version_ = 0;

  std::uint64_t cache_version_ = ~std::uint64_t{0};
  std::uint64_t lifted_version_ = ~std::uint64_t{0};
  std::uint64_t evals_ = 0;
  Tuple cache_;
  Tuple lifted_cache_;
};

// Repeats step() until the raw gradient norm drops below tol_grad (that step
// is recorded) or max_iter steps have run.
Trace run(TrivRun& state, const Objective& objective, double tol_grad, std::uint64_t max_iter);

// Curvature-derived learning rate for raw coordinates: step_size(profile, α, R)
// converted through the frame gain.
double curvature_learning_rate(const ManifoldSpec& spec, double alpha, double R);

}  // namespace trivopt
