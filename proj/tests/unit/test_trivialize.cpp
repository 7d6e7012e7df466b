#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "trivopt/curvature.hpp"
#include "trivopt/expm.hpp"
#include "trivopt/problems.hpp"
#include "trivopt/trivialize.hpp"

using namespace trivopt;

namespace {

// f(Q) = ‖Q − R‖² summed over a tuple of targets.
Objective distance_to(const Tuple& targets) {
  return [targets](const Tuple& x) {
    Evaluation ev;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Matrix r = x[i] - targets[i];
      ev.value += frobenius_inner(r, r);
      ev.gradients.push_back(2.0 * r);
    }
    return ev;
  };
}

Matrix rotation2(double a) { return Matrix{{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}}; }

}  // namespace

TEST(StoppingRule, Validation) {
  EXPECT_THROW(StoppingRule::every_k(0), ContractError);
  EXPECT_THROW(StoppingRule::grad_ratio(1.5, 10), ContractError);
  EXPECT_THROW(StoppingRule::grad_ratio(0.1, 0.9), ContractError);
  EXPECT_EQ(parse_rule_kind("everyk"), StoppingRule::Kind::EveryK);
  EXPECT_EQ(to_string(StoppingRule::Kind::GradRatio), "gradratio");
  EXPECT_THROW(parse_rule_kind("sometimes"), ContractError);
}

TEST(Step, AlwaysWithGradientDescentIsRiemannianGradientDescent) {
  const Problem p = random_procrustes(4, 3);
  const double eta = 0.02;
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(eta)}, StoppingRule::always());
  Matrix x = p.initial[0];
  for (int t = 0; t < 10; ++t) {
    const Matrix g = p.objective({x}).gradients[0];
    x = matmul(x, expm(-2.0 * eta * skew_part(matmul_tn(x, g))));
    run.step(p.objective);
    EXPECT_LE(frobenius_norm(run.cached_eval()[0] - x), 1e-10) << "step " << t;
  }
  EXPECT_EQ(run.outer(), 10u);
}

TEST(Step, FirstStepFromZeroIsExponentialOfGradient) {
  const Problem p = random_procrustes(5, 4);
  const double eta = 0.03;
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(eta)}, StoppingRule::never());
  const Matrix b = p.initial[0];
  const Matrix g = p.objective({b}).gradients[0];
  run.step(p.objective);
  const Matrix expected = matmul(b, expm(-2.0 * eta * skew_part(matmul_tn(b, g))));
  EXPECT_LE(frobenius_norm(run.cached_eval()[0] - expected), 1e-12);
}

TEST(Step, NeverKeepsBase) {
  const Problem p = random_procrustes(3, 5);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(0.01)}, StoppingRule::never());
  const Tuple base = run.base();
  for (int t = 0; t < 1000; ++t) EXPECT_FALSE(run.step(p.objective).stop_fired);
  EXPECT_EQ(run.base(), base);
  EXPECT_EQ(run.outer(), 0u);
  EXPECT_EQ(run.inner(), 1000u);
}

TEST(Step, EveryKCountsAcceptedSteps) {
  const Problem p = random_procrustes(3, 6);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(0.01)}, StoppingRule::every_k(7));
  for (int t = 1; t <= 30; ++t) {
    const StepRecord rec = run.step(p.objective);
    EXPECT_EQ(rec.stop_fired, t % 7 == 0) << t;
    EXPECT_EQ(rec.outer_i, static_cast<std::uint64_t>((t - 1) / 7));
  }
  EXPECT_EQ(run.outer(), 4u);
  EXPECT_EQ(run.inner(), 2u);
}

TEST(Step, GradRatioFiresOnlyOutsideBand) {
  const Problem p = random_procrustes(4, 7);
  // A very narrow band around 1 forces a basepoint change as soon as the
  // pulled-back gradient drifts from the Riemannian one.
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(0.05)}, StoppingRule::grad_ratio(0.999999, 1.000001));
  const StepRecord first = run.step(p.objective);
  EXPECT_NEAR(first.grad_ratio, 1.0, 1e-12);
  EXPECT_FALSE(first.stop_fired);
  bool fired = false;
  for (int t = 0; t < 20 && !fired; ++t) {
    const StepRecord r = run.step(p.objective);
    fired = r.stop_fired;
    EXPECT_EQ(fired, r.grad_ratio < 0.999999 || r.grad_ratio > 1.000001);
  }
  EXPECT_TRUE(fired);
}

TEST(Step, RebaseKeepsPointFixed) {
  const Problem p = random_procrustes(4, 8);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(0.05)}, StoppingRule::never());
  for (int t = 0; t < 5; ++t) run.step(p.objective);
  const Matrix before = run.cached_eval()[0];
  run.rebase();
  EXPECT_EQ(max_abs(run.raw()[0]), 0.0);
  const Matrix after = triv(p.spec, run.base()[0], run.raw()[0]);
  EXPECT_LE(frobenius_norm(after - before), 1e-12);
}

TEST(Step, OptimiserResetOnRebaseSkipsEuclideanFactors) {
  const auto spec = ManifoldSpec::product({ManifoldSpec::special_orthogonal(3), ManifoldSpec::euclidean(2, 2)});
  const Tuple start = random_tuple(spec, 9);
  const Tuple targets = random_tuple(spec, 10);
  TrivRun run(spec, start, {OptimizerConfig::adam(0.01)}, StoppingRule::every_k(3));
  for (int t = 0; t < 3; ++t) run.step(distance_to(targets));
  EXPECT_EQ(run.optimizers()[0].step_count(), 0u);
  EXPECT_EQ(run.optimizers()[1].step_count(), 3u);
}

TEST(Step, DivergenceCarriesIteration) {
  const Problem p = random_quadratic(3, 2, 11);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(5.0)}, StoppingRule::never());
  try {
    for (int t = 0; t < 200; ++t) run.step(p.objective);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.iteration(), 3u);
    EXPECT_EQ(e.iteration(), run.iterations());
  }
  TrivRun nan_run(p.spec, p.initial, {OptimizerConfig::gd(0.1)}, StoppingRule::never());
  const Objective bad = [](const Tuple& x) { return Evaluation{std::nan(""), {x[0]}}; };
  EXPECT_THROW(nan_run.step(bad), DivergenceError);
}

TEST(GradRatio, OneAtZeroRaw) {
  const Problem p = random_procrustes(4, 12);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(0.05)}, StoppingRule::never());
  EXPECT_DOUBLE_EQ(run.grad_ratio(p.objective), 1.0);
}

TEST(GradRatio, FlatCircleIsAlwaysOne) {
  const auto spec = ManifoldSpec::special_orthogonal(2);
  const Objective f = distance_to({rotation2(2.0)});
  TrivRun run(spec, {Matrix::identity(2)}, {OptimizerConfig::gd(0.05)}, StoppingRule::never());
  for (double a : {0.3, 1.0, 2.5, -3.0}) {
    run.set_raw({Matrix{{0, 0}, {a, 0}}});
    EXPECT_NEAR(run.grad_ratio(f), 1.0, 1e-12) << a;
  }
}

TEST(GradRatio, VanishesNearConjugateLocusOfSphere) {
  // f(x) = ⟨c, x⟩ with c normal to the geodesic: the pulled-back gradient
  // shrinks like sin(r)/r as r → π.
  const auto spec = ManifoldSpec::sphere(3);
  Matrix e1(3, 1);
  e1(0, 0) = 1.0;
  // Raw entry 1 moves along the second lifted column, so the third one is
  // normal to the whole geodesic.
  const Matrix c = lift(spec, e1).block(0, 2, 3, 1);
  const Objective f = [c](const Tuple& x) { return Evaluation{frobenius_inner(c, x[0]), {c}}; };
  TrivRun run(spec, {e1}, {OptimizerConfig::gd(0.05)}, StoppingRule::never());
  double prev = 2.0;
  for (double r : {1.0, 2.0, 3.0, 3.1, 3.14}) {
    Matrix raw(3, 1);
    raw(1, 0) = r;
    run.set_raw({raw});
    const double ratio = run.grad_ratio(f);
    EXPECT_NEAR(ratio, std::sin(r) / r, 1e-9) << r;
    EXPECT_LT(ratio, prev);
    prev = ratio;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Run, StopsOnTolerance) {
  const Problem p = random_procrustes(4, 2);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(1.0 / p.ambient_hessian_bound)}, StoppingRule::always());
  const Trace trace = trivopt::run(run, p.objective, 1e-6, 500);
  ASSERT_FALSE(trace.empty());
  EXPECT_LT(trace.back().grad_norm_raw, 1e-6);
  EXPECT_LT(trace.size(), 500u);
}

TEST(Run, CriticalStartTerminatesImmediately) {
  const Problem p = random_procrustes(4, 13);
  TrivRun run(p.spec, p.oracle->point, {OptimizerConfig::gd(0.01)}, StoppingRule::never());
  const Trace trace = trivopt::run(run, p.objective, 1e-8, 100);
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_EQ(trace[0].iter, 0u);
}

TEST(Run, ZeroIterationsGiveEmptyTrace) {
  const Problem p = random_procrustes(3, 14);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(0.01)}, StoppingRule::never());
  EXPECT_TRUE(trivopt::run(run, p.objective, 1e-8, 0).empty());
}

TEST(Cache, CountsEvaluations) {
  const Problem p = random_procrustes(4, 15);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(0.01)}, StoppingRule::never());
  run.cached_eval();
  const auto n0 = run.eval_count();
  const Tuple& a = run.cached_eval();
  const Tuple& b = run.cached_eval();
  EXPECT_EQ(&a, &b);
  EXPECT_EQ(run.eval_count(), n0);

  Tuple raw = run.raw();
  raw[0](1, 0) = 0.1;
  run.set_raw(raw);
  run.cached_eval();
  EXPECT_EQ(run.eval_count(), n0 + 1);

  raw[0](2, 0) = 0.2;
  run.set_raw(raw);
  for (int i = 0; i < 100; ++i) run.cached_eval();
  EXPECT_EQ(run.eval_count(), n0 + 2);
}

TEST(Descent, CurvatureStepIsMonotone) {
  const Problem p = random_procrustes(5, 16);
  const double eta = curvature_learning_rate(p.spec, p.ambient_hessian_bound, 1.0);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(eta)}, StoppingRule::always());
  double prev = p.value(run.cached_eval());
  for (int t = 0; t < 200; ++t) {
    run.step(p.objective);
    const double f = p.value(run.cached_eval());
    EXPECT_LE(f, prev + 1e-12) << "step " << t;
    prev = f;
  }
}

TEST(Descent, StaticRateOnFlatTorus) {
  // Product of two circles, f = Σ‖Qᵢ − Rᵢ‖², f* = 0. In raw coordinates
  // f∘triv = Σ 4 − 4cos(aᵢ − θᵢ), so α̂ = 4 and η = 1/4.
  const auto circle = ManifoldSpec::special_orthogonal(2);
  const auto spec = ManifoldSpec::product({circle, circle});
  const Objective f = distance_to({rotation2(2.0), rotation2(-2.5)});
  const double alpha_raw = 2.0 * circle.frame_gain() * circle.frame_gain();
  const double eta = curvature_learning_rate(circle, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(eta, 1.0 / alpha_raw);
  TrivRun run(spec, {Matrix::identity(2), Matrix::identity(2)}, {OptimizerConfig::gd(eta)}, StoppingRule::never());
  const double f0 = f(run.cached_eval()).value;
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 40; ++t) {
    best = std::min(best, run.step(f).grad_norm_raw);
    EXPECT_LE(best, std::sqrt(2.0 * alpha_raw * f0 / (t + 1))) << "T=" << t;
  }
}

TEST(CurvatureLearningRate, NeedsStoredProfile) {
  EXPECT_THROW(curvature_learning_rate(ManifoldSpec::spd(3), 1.0, 1.0), ContractError);
  EXPECT_THROW(curvature_learning_rate(ManifoldSpec::stiefel(4, 2), 1.0, 1.0), ContractError);
  const auto so = ManifoldSpec::special_orthogonal(4);
  EXPECT_NEAR(curvature_learning_rate(so, 1.0, 2.0), 0.75 / 2.0, 1e-15);
}

TEST(Step, RepeatedRebasingDoesNotDrift) {
  const Problem p = random_procrustes(8, 40);
  TrivRun run(p.spec, p.initial, {OptimizerConfig::gd(1.0 / p.ambient_hessian_bound)}, StoppingRule::always());
  for (int t = 0; t < 5000; ++t) run.step(p.objective);
  EXPECT_LE(orthonormality_residual(run.base()[0]), 1e-13);
  EXPECT_LE(orthonormality_residual(run.cached_eval()[0]), 1e-13);
}
