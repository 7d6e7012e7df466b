#include "trivopt/trivialize.hpp"

#include <cmath>
#include <utility>

#include "trivopt/errors.hpp"

namespace trivopt {

// ---------------------------------------------------------------------------
// StoppingRule

StoppingRule StoppingRule::never() { return StoppingRule{}; }

StoppingRule StoppingRule::always() {
  StoppingRule r;
  r.kind = Kind::Always;
  return r;
}

StoppingRule StoppingRule::every_k(std::uint64_t k) {
  StoppingRule r;
  r.kind = Kind::EveryK;
  r.k = k;
  r.validate();
  return r;
}

StoppingRule StoppingRule::grad_ratio(double eps_low, double eps_high) {
  StoppingRule r;
  r.kind = Kind::GradRatio;
  r.eps_low = eps_low;
  r.eps_high = eps_high;
  r.validate();
  return r;
}

void StoppingRule::validate() const {
  if (kind == Kind::EveryK && k == 0) throw ContractError("stopping rule: k must be positive");
  if (kind == Kind::GradRatio && !(eps_low > 0.0 && eps_low < 1.0 && eps_high > 1.0)) {
    throw ContractError("stopping rule: requires 0 < eps_low < 1 < eps_high");
  }
}

StoppingRule::Kind parse_rule_kind(const std::string& name) {
  if (name == "never") return StoppingRule::Kind::Never;
  if (name == "always") return StoppingRule::Kind::Always;
  if (name == "everyk") return StoppingRule::Kind::EveryK;
  if (name == "gradratio") return StoppingRule::Kind::GradRatio;
  throw ContractError("unknown stopping rule '" + name +
                      "' (expected never, always, everyk or gradratio)");
}

std::string to_string(StoppingRule::Kind kind) {
  switch (kind) {
    case StoppingRule::Kind::Never: return "never";
    case StoppingRule::Kind::Always: return "always";
    case StoppingRule::Kind::EveryK: return "everyk";
    case StoppingRule::Kind::GradRatio: return "gradratio";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// TrivRun

namespace {

constexpr double kDivergenceLimit = 1e12;

bool tuple_finite(const Tuple& t) {
  for (const auto& m : t) {
    if (!m.all_finite()) return false;
  }
  return true;
}

}  // namespace

TrivRun::TrivRun(ManifoldSpec spec, const Tuple& initial_points,
                 std::vector<OptimizerConfig> optimizers, StoppingRule rule)
    : spec_(std::move(spec)), parts_(spec_.components()), rule_(rule) {
  rule_.validate();
  base_ = lift_tuple(spec_, initial_points);
  raw_ = zero_raw_tuple(spec_);
  if (optimizers.size() == 1) optimizers.resize(parts_.size(), optimizers.front());
  if (optimizers.size() != parts_.size()) {
    throw ShapeError("TrivRun: expected one optimizer config per component");
  }
  opts_.reserve(optimizers.size());
  for (const auto& c : optimizers) opts_.emplace_back(c);
}

const Tuple& TrivRun::cached_lifted() {
  if (lifted_version_ != version_) {
    lifted_cache_ = triv_lifted_tuple(spec_, base_, raw_);
    cache_.clear();
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      cache_.push_back(project(parts_[i], lifted_cache_[i]));
    }
    ++evals_;
    lifted_version_ = version_;
    cache_version_ = version_;
  }
  return lifted_cache_;
}

const Tuple& TrivRun::cached_eval() {
  if (cache_version_ != version_) cached_lifted();
  return cache_;
}

Tuple TrivRun::base_points() const {
  Tuple out;
  for (std::size_t i = 0; i < parts_.size(); ++i) out.push_back(project(parts_[i], base_[i]));
  return out;
}

void TrivRun::set_raw(const Tuple& raw) {
  if (raw.size() != raw_.size()) throw ShapeError("set_raw: component count mismatch");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Shape s = parts_[i].raw_shape();
    if (raw[i].rows() != s.rows || raw[i].cols() != s.cols) {
      throw ShapeError("set_raw: raw shape mismatch in component " + std::to_string(i));
    }
  }
  raw_ = raw;
  touch();
}

Tuple TrivRun::riemannian_gradient(const Tuple& ambient) {
  const Tuple& lifted = cached_lifted();
  return pullback_grad_tuple(spec_, lifted, zero_raw_tuple(spec_), ambient);
}

double TrivRun::grad_ratio(const Objective& objective) {
  const Evaluation ev = objective(cached_eval());
  const double num = tuple_norm(pullback_grad_tuple(spec_, base_, raw_, ev.gradients));
  const double den = tuple_norm(riemannian_gradient(ev.gradients));
  return den > 1e-15 ? num / den : 1.0;
}

namespace {

// Composing thousands of basepoint updates lets rounding pile up in the
// orthogonal factors. One Newton-Schulz polar step X(3I − XᵀX)/2 pulls a
// nearly orthogonal X back to working precision without changing det X, and
// symmetrising does the same job for SPD bases.
Matrix clean_lifted(const ManifoldSpec& part, const Matrix& lifted) {
  if (part.kind() == ManifoldKind::SPD) return sym_part(lifted);
  if (part.kind() != ManifoldKind::SpecialOrthogonal && !part.is_stiefel_family()) return lifted;
  Matrix gram = matmul_tn(lifted, lifted);
  gram *= -1.0;
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += 3.0;
  Matrix out = matmul(lifted, gram);
  out *= 0.5;
  return out;
}

}  // namespace

void TrivRun::rebase() {
  // The iterate moves only by the rounding-level cleanup of the new base.
  Tuple lifted = cached_lifted();
  Tuple point = cache_;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i].kind() == ManifoldKind::Euclidean) continue;
    lifted[i] = clean_lifted(parts_[i], lifted[i]);
    point[i] = project(parts_[i], lifted[i]);
  }
  base_ = lifted;
  raw_ = zero_raw_tuple(spec_);
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    // A Euclidean factor's trivialisation is a translation, so moving its base
    // changes nothing and its optimiser history stays meaningful.
    if (parts_[i].kind() != ManifoldKind::Euclidean) opts_[i].reset();
  }
  ++outer_;
  inner_ = 0;
  touch();
  lifted_cache_ = lifted;
  cache_ = point;
  lifted_version_ = version_;
  cache_version_ = version_;
}

StepRecord TrivRun::step(const Objective& objective) {
  const Tuple& x = cached_eval();
  const Evaluation ev = objective(x);
  if (ev.gradients.size() != parts_.size()) {
    throw ShapeError("objective returned " + std::to_string(ev.gradients.size()) +
                     " gradients for " + std::to_string(parts_.size()) + " components");
  }
  if (!std::isfinite(ev.value) || ev.value > kDivergenceLimit || !tuple_finite(ev.gradients)) {
    throw DivergenceError("objective diverged at iteration " + std::to_string(iter_), iter_);
  }

  const Tuple g_raw = pullback_grad_tuple(spec_, base_, raw_, ev.gradients);
  const Tuple g_riem = riemannian_gradient(ev.gradients);

  StepRecord rec;
  rec.iter = iter_;
  rec.f_value = ev.value;
  rec.grad_norm_raw = tuple_norm(g_raw);
  rec.grad_norm_riemannian = tuple_norm(g_riem);
  rec.grad_ratio = rec.grad_norm_riemannian > 1e-15 ? rec.grad_norm_raw / rec.grad_norm_riemannian : 1.0;
  rec.outer_i = outer_;

  for (std::size_t i = 0; i < parts_.size(); ++i) opts_[i].update(raw_[i], g_raw[i]);
  touch();
  if (!tuple_finite(raw_)) {
    throw DivergenceError("raw coordinates diverged at iteration " + std::to_string(iter_), iter_);
  }
  ++iter_;
  ++inner_;

  bool fire = false;
  switch (rule_.kind) {
    case StoppingRule::Kind::Never: fire = false; break;
    case StoppingRule::Kind::Always: fire = true; break;
    case StoppingRule::Kind::EveryK: fire = inner_ >= rule_.k; break;
    case StoppingRule::Kind::GradRatio:
      fire = rec.grad_ratio < rule_.eps_low || rec.grad_ratio > rule_.eps_high;
      break;
  }
  if (fire) rebase();
  rec.stop_fired = fire;
  return rec;
}

Trace run(TrivRun& state, const Objective& objective, double tol_grad, std::uint64_t max_iter) {
  Trace trace;
  for (std::uint64_t i = 0; i < max_iter; ++i) {
    trace.push_back(state.step(objective));
    if (trace.back().grad_norm_raw < tol_grad) break;
  }
  return trace;
}

double curvature_learning_rate(const ManifoldSpec& spec, double alpha, double R) {
  const auto parts = spec.components();
  if (parts.size() != 1) {
    throw ContractError("curvature_learning_rate: needs a single manifold, got " + spec.name());
  }
  const auto profile = parts.front().curvature();
  if (!profile) {
    throw ContractError("curvature_learning_rate: " + spec.name() + " has no stored curvature profile");
  }
  const double gain = parts.front().frame_gain();
  return step_size(*profile, alpha, R) / (gain * gain);
}

}  // namespace trivopt
