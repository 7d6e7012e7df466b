// Acceptance run: one PASS/FAIL line per criterion with the measured values.
// Exits nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "trivopt/copy_task.hpp"
#include "trivopt/expm.hpp"
#include "trivopt/problems.hpp"
#include "trivopt/verify.hpp"

using namespace trivopt;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string measured;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Matrix random_skew(std::size_t n, double norm, Rng& rng) {
  Matrix a = skew_part(gaussian_matrix(n, n, rng));
  a *= norm / frobenius_norm(a);
  return a;
}

Outcome expm_orthogonality() {
  Rng rng(101);
  std::uniform_real_distribution<double> radius(0.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = std::array<std::size_t, 3>{4, 16, 64}[i % 3];
    worst = std::max(worst, orthonormality_residual(expm(random_skew(n, radius(rng), rng))));
  }
  return {worst <= 1e-12, "max residual " + fmt("%.3e", worst) + " over 200 samples"};
}

Outcome expm_accuracy() {
  Rng rng(102);
  std::uniform_real_distribution<double> radius(0.0, 4.0);
  std::uniform_int_distribution<int> dim(2, 12);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = static_cast<std::size_t>(dim(rng));
    // Half skew, half general matrices.
    Matrix a = i % 2 ? skew_part(gaussian_matrix(n, n, rng)) : gaussian_matrix(n, n, rng);
    a *= radius(rng) / frobenius_norm(a);
    worst = std::max(worst, testing::oracle_relative_error(expm(a), testing::expm_oracle(a)));
  }
  return {worst <= 5e-14, "max relative error " + fmt("%.3e", worst)};
}

Outcome adjoint_pairing() {
  Rng rng(103);
  std::uniform_int_distribution<int> dim(1, 16);
  std::uniform_real_distribution<double> radius(0.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = static_cast<std::size_t>(dim(rng));
    Matrix x = gaussian_matrix(n, n, rng);
    x *= radius(rng) / frobenius_norm(x);
    const Matrix e = gaussian_matrix(n, n, rng);
    const Matrix g = gaussian_matrix(n, n, rng);
    const double lhs = frobenius_inner(dexpm(x, e), g);
    const double rhs = frobenius_inner(e, adjoint_dexpm(x, g));
    const double scale = frobenius_norm(e) * frobenius_norm(g);
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return {worst <= 1e-10, "max scaled mismatch " + fmt("%.3e", worst)};
}

std::vector<double> unit(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(d);
  double s = 0.0;
  for (double& x : v) s += (x = g(rng)) * x;
  for (double& x : v) x /= std::sqrt(s);
  return v;
}

Outcome rauch_tightness() {
  const ManifoldSpec s = ManifoldSpec::sphere(3);
  double worst = 0.0;
  std::string detail;
  for (double r : {kPi / 8, kPi / 4, kPi / 2}) {
    const ExpChart chart(s, lift(s, random_point(s, 104)));
    const RauchEstimate e = estimate_rauch(chart, unit(chart.dim(), 104), r, {});
    const double exact = std::sin(r) / r;
    const double err = std::max(std::abs(e.min_gain - exact), std::abs(e.max_gain - exact));
    worst = std::max(worst, err);
    detail += fmt(" r=%.4f", r) + fmt(" gain=%.6f", e.max_gain) + fmt(" sinc=%.6f;", exact);
  }
  return {worst <= 1e-4, "max deviation " + fmt("%.2e", worst) + detail};
}

Outcome radial_equality() {
  const ManifoldSpec s = ManifoldSpec::sphere(3);
  const double r = kPi / 4;
  const ExpChart chart(s, lift(s, random_point(s, 105)));
  const HessianEstimate e = estimate_hessian(chart, unit(chart.dim(), 105), r, {});
  // 1/r − sn_4(r)/r² with sn_4(r) = sin(2r)/2.
  const double exact = 1.0 / r - std::sin(2 * r) / (2 * r * r);
  const double err = std::max(std::abs(e.radial_min - exact), std::abs(e.radial_max - exact));
  return {err <= 1e-3,
          "radial " + fmt("%.6f", e.radial_max) + " expected " + fmt("%.6f", exact)};
}

Outcome so4_hessian() {
  const ManifoldSpec so4 = ManifoldSpec::special_orthogonal(4);
  bool ok = true;
  std::string detail;
  for (double r : {0.5, 1.0, 2.0}) {
    double full = 0.0, normal = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const ExpChart chart(so4, random_point(so4, 106 + seed));
      FDConfig fd;
      fd.seed = seed;
      const HessianEstimate e = estimate_hessian(chart, unit(chart.dim(), seed), r, fd);
      full = std::max(full, e.full_max);
      normal = std::max(normal, e.normal_max);
    }
    ok = ok && full <= r / 3 + 1e-3 && normal <= r / 9 + 1e-3;
    detail += fmt(" r=%.1f", r) + fmt(" full=%.4f", full) + fmt("<=%.4f", r / 3) + fmt(" normal=%.4f", normal) +
              fmt("<=%.4f;", r / 9);
  }
  return {ok, detail.substr(1)};
}

Outcome rgd_equivalence() {
  const Problem p = random_procrustes(4, 107);
  const double eta = 1.0 / p.ambient_hessian_bound;
  TrivRun state(p.spec, p.initial, {OptimizerConfig::gd(eta)}, StoppingRule::always());
  Matrix x = p.initial[0];
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Matrix g = p.objective({x}).gradients[0];
    // Explicit RGD along the group exponential. The factor 2 is the squared
    // gain of the skew frame.
    x = matmul(x, expm(-2.0 * eta * skew_part(matmul_tn(x, g))));
    state.step(p.objective);
    worst = std::max(worst, frobenius_norm(state.cached_eval()[0] - x));
  }
  return {worst <= 1e-10, "max distance " + fmt("%.3e", worst) + " over 10 steps"};
}

Outcome submersion() {
  const ManifoldSpec st = ManifoldSpec::stiefel(6, 2);
  Rng rng(108);
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(i / 19.0);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix u = random_point(st, rng);
    worst = std::max(worst, submersion_commutation_defect(u, gaussian_matrix(6, 2, rng), grid));
  }
  return {worst <= 1e-10, "max distance " + fmt("%.3e", worst)};
}

Outcome oracles() {
  const Problem proc = random_procrustes(4, 109);
  TrivRun a(proc.spec, proc.initial, {OptimizerConfig::gd(1.0 / proc.ambient_hessian_bound)}, StoppingRule::always());
  run(a, proc.objective, 0.0, 500);
  const double gap = proc.value(a.cached_eval()) - proc.oracle->value;

  const Problem ray = random_rayleigh(10, 110);
  TrivRun b(ray.spec, ray.initial, {OptimizerConfig::gd(1.0 / ray.ambient_hessian_bound)}, StoppingRule::always());
  run(b, ray.objective, 0.0, 2000);
  const double ray_err = std::abs(ray.value(b.cached_eval()) - ray.oracle->value);

  const Problem kar = random_karcher(4, 2, 111);
  TrivRun c(kar.spec, kar.initial, {OptimizerConfig::gd(0.1)}, StoppingRule::always());
  run(c, kar.objective, 0.0, 500);
  const double kar_err = frobenius_norm(c.cached_eval()[0] - kar.oracle->point[0]);

  return {gap <= 1e-6 && ray_err <= 1e-8 && kar_err <= 1e-8,
          "procrustes gap " + fmt("%.2e", gap) + ", rayleigh |f-lambda_min| " + fmt("%.2e", ray_err) +
              ", karcher distance to midpoint " + fmt("%.2e", kar_err)};
}

Outcome no_drift() {
  const Problem p = random_procrustes(8, 112);
  double worst = 0.0;
  for (const StoppingRule& rule : {StoppingRule::always(), StoppingRule::every_k(100)}) {
    TrivRun state(p.spec, p.initial, {OptimizerConfig::gd(1.0 / p.ambient_hessian_bound)}, rule);
    for (int t = 0; t < 10000; ++t) {
      state.step(p.objective);
      worst = std::max(worst, orthonormality_residual(state.cached_eval()[0]));
    }
  }
  return {worst <= 1e-12, "max residual " + fmt("%.3e", worst) + " over 2 x 10000 steps (always, everyk 100)"};
}

Outcome copy_smoke() {
  CopyTrainConfig cfg;
  cfg.task.seed = 1;
  const double target = 0.5 * copy_task_baseline(cfg.task);
  cfg.target = target;
  const CopyTrainResult res = train_copy_task(cfg);
  const double last = res.averages.empty() ? std::nan("") : res.averages.back();
  if (res.reached) {
    return {true, "10-step average " + fmt("%.5f", last) + " < " + fmt("%.5f", target) + " at step " +
                      std::to_string(*res.reached)};
  }
  return {false, "average after 3000 steps " + fmt("%.5f", last) + ", target " + fmt("%.5f", target)};
}

Outcome flow_classification() {
  VerifyOptions opts;
  opts.only = {"flow"};
  const auto reps = run_verify_suite(opts);
  bool ok = reps.size() == 4;
  std::string detail;
  for (const auto& r : reps) {
    ok = ok && r.pass;
    detail += " " + r.name + "=" + fmt("%.3e", r.estimate) + ";";
  }
  return {ok, detail.empty() ? "no reports" : detail.substr(1)};
}

Outcome pullback() {
  const std::vector<ManifoldSpec> shipped = {
      ManifoldSpec::special_orthogonal(4), ManifoldSpec::stiefel(5, 2), ManifoldSpec::grassmannian(5, 2),
      ManifoldSpec::sphere(4),             ManifoldSpec::spd(3),        ManifoldSpec::euclidean(3, 2),
      ManifoldSpec::product({ManifoldSpec::special_orthogonal(3), ManifoldSpec::spd(2)})};
  bool ok = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < shipped.size(); ++i) {
    const CheckReport r = pullback_check(shipped[i], 113 + i, 20, 1e-6);
    ok = ok && r.pass;
    worst = std::max(worst, r.estimate);
  }
  return {ok, std::to_string(shipped.size()) + " manifolds, max relative error " + fmt("%.3e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"expm orthogonality", expm_orthogonality},
      {"expm accuracy vs oracle", expm_accuracy},
      {"dexpm adjoint pairing", adjoint_pairing},
      {"Rauch tightness on Sphere(3)", rauch_tightness},
      {"radial second-order term on Sphere(3)", radial_equality},
      {"SO(4) second-order bounds", so4_hessian},
      {"Always + GD equals Riemannian GD", rgd_equivalence},
      {"submersion commutation SO(6) -> St(6,2)", submersion},
      {"oracle optima", oracles},
      {"no drift on SO(8)", no_drift},
      {"copy task below half the baseline", copy_smoke},
      {"retraction flow classification", flow_classification},
      {"gradient pullback on shipped manifolds", pullback},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s | %s | %.2f s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.measured.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
