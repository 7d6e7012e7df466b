#include "trivopt/copy_task.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>

#include "trivopt/errors.hpp"
#include "trivopt/expm.hpp"

namespace trivopt {
namespace {

std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finaliser; decorrelates consecutive batch indices.
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void put_i32(std::ostream& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  const std::array<char, 4> b{static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                              static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::int32_t get_i32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw Error("read_copy_batch: truncated input");
  }
  const std::uint32_t u = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return static_cast<std::int32_t>(u);
}

void check_params(const CopyBatch& batch, const Tuple& params) {
  if (params.size() != 3) throw ShapeError("copy task: expected parameters (Q, C, W)");
  const auto& q = params[0];
  const auto& c = params[1];
  const auto& w = params[2];
  const std::size_t classes = static_cast<std::size_t>(batch.alphabet) + 2;
  if (!q.is_square() || c.rows() != q.rows() || c.cols() != classes || w.rows() != classes ||
      w.cols() != q.rows()) {
    throw ShapeError("copy task: parameter shapes do not match the batch");
  }
}

// Columns C[:, x_{t,b}] gathered into an n×batch block.
Matrix gather_inputs(const Matrix& c, const CopyBatch& batch, int t) {
  Matrix out(c.rows(), static_cast<std::size_t>(batch.batch));
  for (int b = 0; b < batch.batch; ++b) {
    const auto col = static_cast<std::size_t>(batch.input(t, b));
    for (std::size_t i = 0; i < c.rows(); ++i) out(i, b) = c(i, col);
  }
  return out;
}

}  // namespace

void CopyTaskConfig::validate() const {
  if (alphabet < 2) throw ContractError("copy task: alphabet size must be at least 2");
  if (seq_len < 1) throw ContractError("copy task: sequence length must be at least 1");
  if (spacing < 1) throw ContractError("copy task: spacing must be at least 1");
  if (hidden < 1) throw ContractError("copy task: hidden size must be positive");
  if (batch < 1) throw ContractError("copy task: batch size must be positive");
}

CopyBatch generate_copy_batch(const CopyTaskConfig& cfg, std::uint64_t index) {
  cfg.validate();
  CopyBatch out;
  out.alphabet = cfg.alphabet;
  out.seq_len = cfg.seq_len;
  out.spacing = cfg.spacing;
  out.batch = static_cast<int>(cfg.batch);
  const int steps = cfg.steps();
  const int blank = cfg.alphabet;
  const int marker = cfg.alphabet + 1;
  const std::size_t total = static_cast<std::size_t>(steps) * cfg.batch;
  out.inputs.assign(total, blank);
  out.targets.assign(total, blank);

  Rng rng(mix(cfg.seed) ^ mix(index + 1));
  std::uniform_int_distribution<int> symbol(0, cfg.alphabet - 1);
  const auto at = [&](int t, int b) { return static_cast<std::size_t>(t) * cfg.batch + b; };
  for (int b = 0; b < out.batch; ++b) {
    for (int t = 0; t < cfg.seq_len; ++t) {
      const int s = symbol(rng);
      out.inputs[at(t, b)] = s;
      out.targets[at(cfg.seq_len + cfg.spacing + t, b)] = s;
    }
    out.inputs[at(cfg.seq_len + cfg.spacing, b)] = marker;
  }
  return out;
}

void write_copy_batch(std::ostream& out, const CopyBatch& batch) {
  put_i32(out, batch.alphabet);
  put_i32(out, batch.seq_len);
  put_i32(out, batch.spacing);
  put_i32(out, batch.batch);
  for (auto v : batch.inputs) put_i32(out, v);
  for (auto v : batch.targets) put_i32(out, v);
  if (!out) throw Error("write_copy_batch: write failed");
}

CopyBatch read_copy_batch(std::istream& in) {
  CopyBatch b;
  b.alphabet = get_i32(in);
  b.seq_len = get_i32(in);
  b.spacing = get_i32(in);
  b.batch = get_i32(in);
  if (b.alphabet < 2 || b.seq_len < 1 || b.spacing < 1 || b.batch < 1) {
    throw Error("read_copy_batch: invalid header");
  }
  const std::size_t total = static_cast<std::size_t>(b.steps()) * b.batch;
  b.inputs.resize(total);
  b.targets.resize(total);
  for (auto& v : b.inputs) v = get_i32(in);
  for (auto& v : b.targets) v = get_i32(in);
  const auto in_range = [&](std::int32_t v) { return v >= 0 && v < b.alphabet + 2; };
  if (!std::all_of(b.inputs.begin(), b.inputs.end(), in_range) ||
      !std::all_of(b.targets.begin(), b.targets.end(), in_range)) {
    throw Error("read_copy_batch: class index out of range");
  }
  return b;
}

double copy_task_baseline(const CopyTaskConfig& cfg) {
  return cfg.seq_len * std::log(static_cast<double>(cfg.alphabet)) / cfg.steps();
}

ManifoldSpec copy_task_spec(const CopyTaskConfig& cfg) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.classes());
  return ManifoldSpec::product({ManifoldSpec::special_orthogonal(cfg.hidden),
                                ManifoldSpec::euclidean(cfg.hidden, k),
                                ManifoldSpec::euclidean(k, cfg.hidden)});
}

Tuple copy_task_init(const CopyTaskConfig& cfg) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.classes());
  const std::size_t n = cfg.hidden;
  Rng rng(mix(cfg.seed ^ 0xc0ffee));
  Matrix q = expm(henaff_init(n, cfg.seed));
  Matrix c = gaussian_matrix(n, k, rng, 1.0 / std::sqrt(static_cast<double>(k)));
  Matrix w = gaussian_matrix(k, n, rng, 1.0 / std::sqrt(static_cast<double>(n)));
  return {std::move(q), std::move(c), std::move(w)};
}

std::vector<Matrix> copy_task_hidden(const CopyBatch& batch, const Tuple& params) {
  check_params(batch, params);
  const Matrix& q = params[0];
  const Matrix& c = params[1];
  std::vector<Matrix> h;
  h.reserve(static_cast<std::size_t>(batch.steps()));
  Matrix prev(q.rows(), static_cast<std::size_t>(batch.batch));
  for (int t = 0; t < batch.steps(); ++t) {
    Matrix next = matmul(q, prev);
    next += gather_inputs(c, batch, t);
    h.push_back(next);
    prev = std::move(next);
  }
  return h;
}

Evaluation copy_task_loss(const CopyBatch& batch, const Tuple& params) {
  const std::vector<Matrix> h = copy_task_hidden(batch, params);
  const Matrix& q = params[0];
  const Matrix& w = params[2];
  const int steps = batch.steps();
  const std::size_t nb = static_cast<std::size_t>(batch.batch);
  const std::size_t classes = w.rows();
  const double scale = 1.0 / (static_cast<double>(steps) * static_cast<double>(nb));

  // Forward readout; dZ_t = (softmax − onehot) · scale is kept for backprop.
  double loss = 0.0;
  std::vector<Matrix> dz(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    Matrix z = matmul(w, h[t]);
    for (std::size_t b = 0; b < nb; ++b) {
      double zmax = z(0, b);
      for (std::size_t i = 1; i < classes; ++i) zmax = std::max(zmax, z(i, b));
      double sum = 0.0;
      for (std::size_t i = 0; i < classes; ++i) sum += std::exp(z(i, b) - zmax);
      const auto y = static_cast<std::size_t>(batch.target(t, static_cast<int>(b)));
      loss += (std::log(sum) + zmax - z(y, b)) * scale;
      for (std::size_t i = 0; i < classes; ++i) {
        z(i, b) = std::exp(z(i, b) - zmax) / sum * scale;
      }
      z(y, b) -= scale;
    }
    dz[t] = std::move(z);
  }

  Matrix dq(q.rows(), q.cols());
  Matrix dc(params[1].rows(), params[1].cols());
  Matrix dw(w.rows(), w.cols());
  Matrix delta(q.rows(), nb);
  for (int t = steps - 1; t >= 0; --t) {
    dw += matmul_nt(dz[t], h[t]);
    Matrix d = matmul_tn(w, dz[t]);
    if (t < steps - 1) d += matmul_tn(q, delta);
    delta = std::move(d);
    if (t > 0) dq += matmul_nt(delta, h[t - 1]);
    for (std::size_t b = 0; b < nb; ++b) {
      const auto col = static_cast<std::size_t>(batch.input(t, static_cast<int>(b)));
      for (std::size_t i = 0; i < dc.rows(); ++i) dc(i, col) += delta(i, b);
    }
  }
  return Evaluation{loss, {std::move(dq), std::move(dc), std::move(dw)}};
}

Problem copy_task(const CopyTaskConfig& cfg) {
  cfg.validate();
  const CopyBatch batch = generate_copy_batch(cfg, 0);
  Problem p;
  p.name = "copy";
  p.spec = copy_task_spec(cfg);
  p.objective = [batch](const Tuple& x) { return copy_task_loss(batch, x); };
  p.initial = copy_task_init(cfg);
  const double err = gradient_check(p.spec, p.objective, 17);
  if (!(err <= 1e-6)) {
    throw ContractError("copy task: gradient disagrees with finite differences (relative " +
                        std::to_string(err) + ")");
  }
  return p;
}

CopyTrainResult train_copy_task(const CopyTrainConfig& cfg, const CopyTrainCallback& callback) {
  cfg.task.validate();
  if (cfg.window < 1) throw ContractError("copy task training: window must be positive");
  const ManifoldSpec spec = copy_task_spec(cfg.task);
  std::vector<OptimizerConfig> opts{OptimizerConfig::adam(cfg.lr * cfg.orthogonal_ratio),
                                    OptimizerConfig::adam(cfg.lr), OptimizerConfig::adam(cfg.lr)};
  TrivRun run(spec, copy_task_init(cfg.task), opts, cfg.rule);

  CopyTrainResult result;
  std::deque<double> recent;
  double running = 0.0;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    const CopyBatch batch = generate_copy_batch(cfg.task, s);
    const StepRecord rec = run.step([&batch](const Tuple& x) { return copy_task_loss(batch, x); });
    result.losses.push_back(rec.f_value);
    recent.push_back(rec.f_value);
    running += rec.f_value;
    if (recent.size() > cfg.window) {
      running -= recent.front();
      recent.pop_front();
    }
    const double avg = running / static_cast<double>(recent.size());
    result.averages.push_back(avg);
    if (callback) callback(rec, avg);
    if (cfg.target > 0.0 && recent.size() == cfg.window && avg < cfg.target) {
      result.reached = s;
      break;
    }
  }
  result.params = run.cached_eval();
  return result;
}

}  // namespace trivopt
