#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "trivopt/cli.hpp"
#include "trivopt/copy_task.hpp"
#include "trivopt/expm.hpp"
#include "trivopt/problems.hpp"
#include "trivopt/verify.hpp"

namespace trivopt::cli {
namespace {

constexpr const char* kUsage =
    "usage: trivopt [bench|verify|expm-bench] [--config FILE] [--key value ...]\n"
    "\n"
    "bench       optimise a benchmark problem and write a per-iteration CSV trace\n"
    "verify      run the numerical bound checks and print one report line per check\n"
    "expm-bench  time the matrix exponential on random skew-symmetric inputs\n"
    "\n"
    "common keys: --problem {procrustes,rayleigh,karcher,pca,brockett,quadratic,copy}\n"
    "  --n --k --opt {gd,momentum,adam} --lr {VALUE,auto,curvature} --alpha --radius\n"
    "  --rule {never,always,everyk,gradratio} --k-every --eps-low --eps-high\n"
    "  --iters --tol --seed --out --timing {true,false}\n"
    "copy task: --alphabet --seq-len --spacing --batch --orth-ratio\n"
    "verify: --only PREFIX[,PREFIX] --tol-scale --threads\n"
    "expm-bench: --sizes N[,N] --count\n"
    "exit codes: 0 ok, 1 check failure, 2 divergence, 64 configuration error\n";

// Output sink: a file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish(const std::string& path) {
    stream().flush();
    if (!stream()) throw Error("write to '" + (path.empty() ? std::string("stdout") : path) + "' failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

OptimizerConfig optimizer_config(const RunConfig& c, double lr) {
  OptimizerConfig o;
  o.kind = parse_optimizer_kind(c.opt);
  o.lr = lr;
  o.beta = c.beta;
  o.beta1 = c.beta1;
  o.beta2 = c.beta2;
  o.eps = c.adam_eps;
  o.validate();
  return o;
}

StoppingRule stopping_rule(const RunConfig& c) {
  switch (parse_rule_kind(c.rule)) {
    case StoppingRule::Kind::Never: return StoppingRule::never();
    case StoppingRule::Kind::Always: return StoppingRule::always();
    case StoppingRule::Kind::EveryK: return StoppingRule::every_k(c.k_every);
    case StoppingRule::Kind::GradRatio: return StoppingRule::grad_ratio(c.eps_low, c.eps_high);
  }
  return StoppingRule::never();
}

Problem build_problem(const RunConfig& c) {
  if (c.problem == "procrustes") return random_procrustes(c.n, c.seed);
  if (c.problem == "rayleigh") return random_rayleigh(c.n, c.seed);
  if (c.problem == "karcher") return random_karcher(c.n, 2, c.seed);
  if (c.problem == "pca") return random_pca(c.n, c.k, c.seed);
  if (c.problem == "brockett") return random_brockett(c.n, c.k, c.seed);
  if (c.problem == "quadratic") return random_quadratic(c.n, c.k, c.seed);
  throw ConfigError("unknown problem '" + c.problem + "'");
}

CopyTaskConfig copy_config(const RunConfig& c) {
  CopyTaskConfig t;
  t.alphabet = c.alphabet;
  t.seq_len = c.seq_len;
  t.spacing = c.spacing;
  t.hidden = c.n;
  t.batch = c.batch;
  t.seed = c.seed;
  try {
    t.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return t;
}

// Learning rate for a single-manifold problem.
double resolve_lr(const RunConfig& c, const Problem& p) {
  switch (c.lr_mode) {
    case LrMode::Fixed: return c.lr;
    case LrMode::Auto: return p.ambient_hessian_bound > 0.0 ? 1.0 / p.ambient_hessian_bound : 0.1;
    case LrMode::Curvature: {
      const double alpha = c.alpha > 0.0 ? c.alpha : p.ambient_hessian_bound;
      if (!(alpha > 0.0)) {
        throw ConfigError("lr = curvature: problem " + c.problem + " has no Hessian bound; set key 'alpha'");
      }
      try {
        return curvature_learning_rate(p.spec, alpha, c.radius);
      } catch (const Error& e) {
        throw ConfigError(std::string("lr = curvature: ") + e.what());
      }
    }
  }
  return c.lr;
}

}  // namespace

int run_bench(const RunConfig& c, std::ostream& diag) {
  const StoppingRule rule = stopping_rule(c);
  std::unique_ptr<TrivRun> run;
  std::optional<Problem> problem;
  std::optional<CopyTaskConfig> copy;

  if (c.problem == "copy") {
    copy = copy_config(c);
    const double lr = c.lr_mode == LrMode::Fixed ? c.lr : 3e-4;
    const OptimizerConfig euclid = optimizer_config(c, lr);
    const OptimizerConfig orth = optimizer_config(c, lr * c.orth_ratio);
    run = std::make_unique<TrivRun>(copy_task_spec(*copy), copy_task_init(*copy),
                                    std::vector<OptimizerConfig>{orth, euclid, euclid}, rule);
  } else {
    problem = build_problem(c);
    const double lr = resolve_lr(c, *problem);
    run = std::make_unique<TrivRun>(problem->spec, problem->initial,
                                    std::vector<OptimizerConfig>{optimizer_config(c, lr)}, rule);
  }

  Sink sink(c.out);
  std::ostream& out = sink.stream();
  out << "iter,f_value,grad_norm_raw,grad_norm_riemannian,stop_fired,outer_i,wall_ms,diverged\n";

  const auto t0 = std::chrono::steady_clock::now();
  const auto wall = [&] {
    if (!c.timing) return 0.0;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  int code = kOk;
  double last_f = std::nan("");
  for (std::uint64_t i = 0; i < c.iters; ++i) {
    StepRecord rec;
    try {
      if (copy) {
        const CopyBatch batch = generate_copy_batch(*copy, i);
        rec = run->step([&batch](const Tuple& x) { return copy_task_loss(batch, x); });
      } else {
        rec = run->step(problem->objective);
      }
    } catch (const DivergenceError& e) {
      out << e.iteration() << ",nan,nan,nan,0," << run->outer() << "," << fmt(wall()) << ",1\n";
      diag << "diverged: " << e.what() << "\n";
      code = kDiverged;
      break;
    }
    last_f = rec.f_value;
    out << rec.iter << "," << fmt(rec.f_value) << "," << fmt(rec.grad_norm_raw) << ","
        << fmt(rec.grad_norm_riemannian) << "," << (rec.stop_fired ? 1 : 0) << "," << rec.outer_i
        << "," << fmt(wall()) << ",0\n";
    if (c.tol > 0.0 && rec.grad_norm_raw < c.tol) break;
  }
  sink.finish(c.out);

  if (code == kOk) {
    diag << "problem " << c.problem << " on " << run->spec().name() << ": last f = " << fmt(last_f);
    if (problem && problem->oracle) {
      const double f_now = problem->value(run->cached_eval());
      diag << ", current f = " << fmt(f_now) << ", oracle = " << fmt(problem->oracle->value)
           << ", gap = " << fmt(f_now - problem->oracle->value);
    }
    if (copy) diag << ", baseline = " << fmt(copy_task_baseline(*copy));
    diag << "\n";
  }
  return code;
}

int run_verify(const RunConfig& c, std::ostream& diag) {
  VerifyOptions opts;
  opts.only = c.only;
  opts.tolerance_scale = c.tol_scale;
  opts.threads = c.threads;
  opts.seed = c.seed;
  const auto reports = run_verify_suite(opts);

  Sink sink(c.out);
  std::size_t passed = 0, failed = 0, skipped = 0;
  for (const auto& r : reports) {
    sink.stream() << r.line() << "\n";
    if (r.skipped) {
      ++skipped;
    } else if (r.pass) {
      ++passed;
    } else {
      ++failed;
    }
  }
  sink.finish(c.out);
  diag << reports.size() << " checks: " << passed << " passed, " << failed << " failed, " << skipped
       << " skipped\n";
  if (reports.empty()) {
    diag << "no check matches the selection\n";
    return kConfigError;
  }
  return failed == 0 ? kOk : kCheckFailure;
}

int run_expm_bench(const RunConfig& c, std::ostream& diag) {
  Sink sink(c.out);
  std::ostream& out = sink.stream();
  out << "n,count,mean_us,max_us,max_orth_residual,max_degree,max_scaling\n";
  Rng rng(c.seed);
  std::uniform_real_distribution<double> radius(0.5, 10.0);
  for (const std::size_t n : c.sizes) {
    double total = 0.0, worst_time = 0.0, worst_res = 0.0;
    int max_degree = 0, max_s = 0;
    for (std::size_t i = 0; i < c.count; ++i) {
      Matrix a = skew_part(gaussian_matrix(n, n, rng));
      const double fn = frobenius_norm(a);
      if (fn > 0.0) a *= radius(rng) / fn;
      ExpmReport rep;
      const auto t0 = std::chrono::steady_clock::now();
      const Matrix q = expm(a, &rep);
      const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
      total += us;
      worst_time = std::max(worst_time, us);
      worst_res = std::max(worst_res, orthonormality_residual(q));
      max_degree = std::max(max_degree, rep.taylor_degree);
      max_s = std::max(max_s, rep.scaling_exponent);
    }
    out << n << "," << c.count << "," << fmt(total / static_cast<double>(c.count)) << ","
        << fmt(worst_time) << "," << fmt(worst_res) << "," << max_degree << "," << max_s << "\n";
  }
  sink.finish(c.out);
  diag << "expm-bench: " << c.sizes.size() << " sizes, " << c.count << " samples each\n";
  return kOk;
}

int main_entry(const std::vector<std::string>& args, std::ostream& diag) {
  if (std::find_if(args.begin(), args.end(), [](const std::string& a) { return a == "-h" || a == "--help"; }) !=
      args.end()) {
    std::cout << kUsage;
    return kOk;
  }
  try {
    const RunConfig cfg = parse_config(args);
    if (cfg.command == "verify") return run_verify(cfg, diag);
    if (cfg.command == "expm-bench") return run_expm_bench(cfg, diag);
    return run_bench(cfg, diag);
  } catch (const ConfigError& e) {
    diag << "configuration error: " << e.what() << "\n" << kUsage;
    return kConfigError;
  } catch (const ContractError& e) {
    diag << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return kCheckFailure;
  }
}

}  // namespace trivopt::cli
