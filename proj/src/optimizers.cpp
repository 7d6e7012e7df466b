#include "trivopt/optimizers.hpp"

#include <cmath>

#include "trivopt/errors.hpp"

namespace trivopt {

OptimizerConfig OptimizerConfig::gd(double lr) {
  OptimizerConfig c;
  c.kind = OptimizerKind::GD;
  c.lr = lr;
  return c;
}

OptimizerConfig OptimizerConfig::momentum(double lr, double beta) {
  OptimizerConfig c;
  c.kind = OptimizerKind::Momentum;
  c.lr = lr;
  c.beta = beta;
  return c;
}

OptimizerConfig OptimizerConfig::adam(double lr, double beta1, double beta2, double eps) {
  OptimizerConfig c;
  c.kind = OptimizerKind::Adam;
  c.lr = lr;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.eps = eps;
  return c;
}

void OptimizerConfig::validate() const {
  auto in_unit = [](double b) { return b >= 0.0 && b < 1.0; };
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("optimizer: lr must be positive");
  if (!in_unit(beta) || !in_unit(beta1) || !in_unit(beta2)) {
    throw ContractError("optimizer: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ContractError("optimizer: eps must be positive");
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "gd" || name == "sgd") return OptimizerKind::GD;
  if (name == "momentum") return OptimizerKind::Momentum;
  if (name == "adam") return OptimizerKind::Adam;
  throw ContractError("unknown optimizer '" + name + "' (expected gd, momentum or adam)");
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::GD: return "gd";
    case OptimizerKind::Momentum: return "momentum";
    case OptimizerKind::Adam: return "adam";
  }
  return "?";
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::set_lr(double lr) {
  OptimizerConfig c = config_;
  c.lr = lr;
  c.validate();
  config_ = c;
}

void Optimizer::reset() {
  steps_ = 0;
  m_ = Matrix();
  v_ = Matrix();
}

void Optimizer::update(Matrix& raw, const Matrix& grad) {
  require_same_shape(raw, grad, "Optimizer::update");
  ++steps_;
  switch (config_.kind) {
    case OptimizerKind::GD:
      raw -= config_.lr * grad;
      return;

    case OptimizerKind::Momentum:
      if (m_.empty()) m_ = Matrix(grad.rows(), grad.cols());
      require_same_shape(m_, grad, "Optimizer::update (momentum buffer)");
      m_ *= config_.beta;
      m_ += grad;
      raw -= config_.lr * m_;
      return;

    case OptimizerKind::Adam: {
      if (m_.empty()) {
        m_ = Matrix(grad.rows(), grad.cols());
        v_ = Matrix(grad.rows(), grad.cols());
      }
      require_same_shape(m_, grad, "Optimizer::update (Adam buffer)");
      const double b1 = config_.beta1;
      const double b2 = config_.beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
      const double* g = grad.data();
      double* m = m_.data();
      double* v = v_.data();
      double* x = raw.data();
      for (std::size_t i = 0; i < grad.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        x[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
      }
      return;
    }
  }
}

}  // namespace trivopt
