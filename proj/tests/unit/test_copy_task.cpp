#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "trivopt/copy_task.hpp"
#include "trivopt/dense/linalg.hpp"

using namespace trivopt;

namespace {

CopyTaskConfig tiny() {
  CopyTaskConfig c;
  c.alphabet = 3;
  c.seq_len = 2;
  c.spacing = 4;
  c.hidden = 6;
  c.batch = 2;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(CopyTask, BaselineValue) {
  CopyTaskConfig c;
  // 10 ln 9 / 120
  EXPECT_NEAR(copy_task_baseline(c), 0.18310, 1e-5);
  EXPECT_EQ(c.steps(), 120);
  EXPECT_EQ(c.classes(), 11);
}

TEST(CopyTask, BatchLayout) {
  CopyTaskConfig c;
  c.batch = 8;
  c.seed = 3;
  const CopyBatch b = generate_copy_batch(c, 0);
  const int blank = c.alphabet, marker = c.alphabet + 1;
  ASSERT_EQ(b.inputs.size(), 120u * 8u);
  for (int j = 0; j < b.batch; ++j) {
    for (int t = 0; t < b.steps(); ++t) {
      const int x = b.input(t, j), y = b.target(t, j);
      if (t < c.seq_len) {
        EXPECT_GE(x, 0);
        EXPECT_LT(x, c.alphabet);
        EXPECT_EQ(b.target(c.seq_len + c.spacing + t, j), x);
      } else if (t == c.seq_len + c.spacing) {
        EXPECT_EQ(x, marker);
      } else {
        EXPECT_EQ(x, blank);
      }
      if (t < c.seq_len + c.spacing) EXPECT_EQ(y, blank);
    }
  }
}

TEST(CopyTask, DeterministicPerSeedAndIndex) {
  CopyTaskConfig c = tiny();
  EXPECT_EQ(generate_copy_batch(c, 4), generate_copy_batch(c, 4));
  EXPECT_FALSE(generate_copy_batch(c, 4) == generate_copy_batch(c, 5));
  CopyTaskConfig d = c;
  d.seed = 6;
  d.batch = 16;
  c.batch = 16;
  EXPECT_FALSE(generate_copy_batch(c, 0) == generate_copy_batch(d, 0));
}

TEST(CopyTask, SerializationRoundTrip) {
  const CopyBatch b = generate_copy_batch(tiny(), 2);
  std::stringstream ss;
  write_copy_batch(ss, b);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u * (4 + 2 * b.inputs.size()));
  // Header is little-endian int32: A = 3 first.
  EXPECT_EQ(bytes[0], 3);
  EXPECT_EQ(bytes[1], 0);
  EXPECT_EQ(read_copy_batch(ss), b);
}

TEST(CopyTask, ReaderRejectsCorruptInput) {
  const CopyBatch b = generate_copy_batch(tiny(), 0);
  std::stringstream ss;
  write_copy_batch(ss, b);
  std::string bytes = ss.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(read_copy_batch(truncated), Error);
  bytes[16] = 99;  // first input index out of range
  std::stringstream bad(bytes);
  EXPECT_THROW(read_copy_batch(bad), Error);
}

TEST(CopyTask, ZeroInputsGiveZeroStatesAndUniformLoss) {
  const CopyTaskConfig c = tiny();
  const CopyBatch b = generate_copy_batch(c, 0);
  Tuple params = copy_task_init(c);
  params[1] = Matrix(params[1].rows(), params[1].cols());
  for (const auto& h : copy_task_hidden(b, params)) EXPECT_EQ(max_abs(h), 0.0);
  params[2] = Matrix(params[2].rows(), params[2].cols());
  const Evaluation ev = copy_task_loss(b, params);
  EXPECT_NEAR(ev.value, std::log(static_cast<double>(c.classes())), 1e-14);
}

TEST(CopyTask, GradientMatchesFiniteDifferences) {
  const CopyTaskConfig c = tiny();
  const CopyBatch b = generate_copy_batch(c, 1);
  const Objective f = [&b](const Tuple& x) { return copy_task_loss(b, x); };
  EXPECT_LE(gradient_check(copy_task_spec(c), f, 3), 1e-5);
}

TEST(CopyTask, InitialRecurrenceIsOrthogonal) {
  const CopyTaskConfig c = tiny();
  const Tuple p = copy_task_init(c);
  EXPECT_LE(orthonormality_residual(p[0]), 1e-13);
  EXPECT_NEAR(determinant(p[0]), 1.0, 1e-12);
  EXPECT_EQ(p[1].cols(), 5u);
  EXPECT_EQ(p[2].rows(), 5u);
}

TEST(CopyTask, ProblemPassesGradientGate) {
  const Problem p = copy_task(tiny());
  EXPECT_EQ(p.name, "copy");
  EXPECT_FALSE(p.oracle);
  EXPECT_GT(p.value(p.initial), 0.0);
}

TEST(CopyTask, InvalidConfigurationThrows) {
  CopyTaskConfig c = tiny();
  c.alphabet = 1;
  EXPECT_THROW(c.validate(), ContractError);
  c = tiny();
  c.batch = 0;
  EXPECT_THROW(generate_copy_batch(c, 0), ContractError);
}

TEST(CopyTask, ShortTrainingRunIsReproducibleAndLowersTheLoss) {
  CopyTrainConfig cfg;
  cfg.task = tiny();
  cfg.task.batch = 16;
  cfg.steps = 60;
  cfg.lr = 1e-2;
  cfg.rule = StoppingRule::every_k(10);
  const CopyTrainResult a = train_copy_task(cfg);
  const CopyTrainResult b = train_copy_task(cfg);
  ASSERT_EQ(a.losses.size(), 60u);
  EXPECT_EQ(a.losses, b.losses);
  EXPECT_LT(a.averages.back(), a.averages[9]);
  EXPECT_LE(orthonormality_residual(a.params[0]), 1e-12);
  EXPECT_FALSE(a.reached);
}
