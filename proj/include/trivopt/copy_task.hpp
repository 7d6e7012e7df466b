#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "trivopt/problems.hpp"

namespace trivopt {

// Copying-memory task: read S symbols, wait L steps, then reproduce them after
// a start marker. Classes 0..A−1 are symbols, A is the blank, A+1 the marker.
struct CopyTaskConfig {
  int alphabet = 9;         // A
  int seq_len = 10;         // S
  int spacing = 100;        // L
  std::size_t hidden = 64;  // n
  std::size_t batch = 64;
  std::uint64_t seed = 0;

  int classes() const noexcept { return alphabet + 2; }
  int steps() const noexcept { return spacing + 2 * seq_len; }  // T = L + 2S
  void validate() const;
};

// Indices are stored time-major: entry (t, b) lives at t·batch + b.
struct CopyBatch {
  int alphabet = 0;
  int seq_len = 0;
  int spacing = 0;
  int batch = 0;
  std::vector<std::int32_t> inputs;
  std::vector<std::int32_t> targets;

  int steps() const noexcept { return spacing + 2 * seq_len; }
  std::int32_t input(int t, int b) const { return inputs[static_cast<std::size_t>(t) * batch + b]; }
  std::int32_t target(int t, int b) const { return targets[static_cast<std::size_t>(t) * batch + b]; }
  friend bool operator==(const CopyBatch&, const CopyBatch&) = default;
};

// Batch number `index` of the stream determined by cfg.seed.
CopyBatch generate_copy_batch(const CopyTaskConfig& cfg, std::uint64_t index);

// Little-endian int32 layout: A, S, L, batch, then the T·batch input indices
// followed by the T·batch target indices.
void write_copy_batch(std::ostream& out, const CopyBatch& batch);
CopyBatch read_copy_batch(std::istream& in);

// Cross-entropy of the best memoryless predictor: S·ln(A) / (L + 2S).
double copy_task_baseline(const CopyTaskConfig& cfg);

// Product[SO(n), R^(n×(A+2)), R^((A+2)×n)] holding (Q, C, W) of the linear
// recurrence h_t = Q h_{t−1} + C x_t with readout softmax(W h_t).
ManifoldSpec copy_task_spec(const CopyTaskConfig& cfg);

// Q = expm of a Henaff block-diagonal skew matrix, C ~ N(0, 1/(A+2)), W ~ N(0, 1/n).
Tuple copy_task_init(const CopyTaskConfig& cfg);

// Mean cross-entropy over all T·batch outputs, with exact gradients for Q, C
// and W by backpropagation through time.
Evaluation copy_task_loss(const CopyBatch& batch, const Tuple& params);

// Hidden states h_1..h_T (each n×batch) for the given parameters.
std::vector<Matrix> copy_task_hidden(const CopyBatch& batch, const Tuple& params);

// The task as a Problem evaluated on batch 0.
Problem copy_task(const CopyTaskConfig& cfg);

struct CopyTrainConfig {
  CopyTaskConfig task;
  std::size_t steps = 3000;
  double lr = 3e-4;             // Euclidean factors (C, W)
  double orthogonal_ratio = 7;  // lr of Q = orthogonal_ratio · lr
  StoppingRule rule = StoppingRule::every_k(100);
  std::size_t window = 10;      // moving-average length for the reported loss
  double target = 0.0;          // stop once the moving average drops below; ≤ 0 runs all steps
};

struct CopyTrainResult {
  std::vector<double> losses;       // per-step batch loss
  std::vector<double> averages;     // trailing moving average over `window`
  std::optional<std::size_t> reached;  // first step whose average is below target
  Tuple params;
};

using CopyTrainCallback = std::function<void(const StepRecord&, double moving_average)>;

// Adam on every factor with a fresh batch per step.
CopyTrainResult train_copy_task(const CopyTrainConfig& cfg, const CopyTrainCallback& callback = {});

}  // namespace trivopt
