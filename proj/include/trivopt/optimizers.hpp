#pragma once

#include <cstdint>
#include <string>

#include "trivopt/dense/matrix.hpp"

namespace trivopt {

enum class OptimizerKind { GD, Momentum, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::GD;
  double lr = 1e-2;
  double beta = 0.9;   // momentum
  double beta1 = 0.9;  // Adam
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerConfig gd(double lr);
  static OptimizerConfig momentum(double lr, double beta = 0.9);
  static OptimizerConfig adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // Throws ContractError for lr ≤ 0, betas outside [0, 1) or eps ≤ 0.
  void validate() const;
};

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);

// One optimiser instance per parameter matrix. Buffers are allocated on the
// first update and keep the shape of that gradient.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  // raw ← raw − lr·direction, where the direction depends on the variant.
  void update(Matrix& raw, const Matrix& grad);

  // Zeroes moments and the step counter; hyperparameters are kept.
  void reset();

  const OptimizerConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return steps_; }
  // Mutable learning rate so callers can rescale it (e.g. curvature policy).
  void set_lr(double lr);

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  Matrix m_;
  Matrix v_;
};

}  // namespace trivopt
