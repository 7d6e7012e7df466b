#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "trivopt/dense/kernels.hpp"
#include "trivopt/dense/linalg.hpp"
#include "trivopt/random.hpp"

using namespace trivopt;
namespace k = trivopt::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  }
  return worst;
}

// Restores the startup kernel selection after each test.
class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    saved_ = k::active().isa;
    if (!k::avx2_table()) GTEST_SKIP() << "AVX2 kernels unavailable on this machine";
  }
  void TearDown() override { k::select(saved_); }
  k::Isa saved_ = k::Isa::Scalar;
};

}  // namespace

TEST_F(KernelEquivalence, GemmMatchesScalarOverOddShapes) {
  const auto& s = k::scalar_table();
  const auto* v = k::avx2_table();
  for (std::size_t m : {1u, 3u, 7u, 16u, 33u}) {
    for (std::size_t n : {1u, 4u, 5u, 17u, 64u}) {
      for (std::size_t kk : {1u, 2u, 9u, 31u}) {
        const auto a = random_vector(m * kk, m * 1000 + n * 10 + kk);
        const auto b = random_vector(kk * n, m + n * 100 + kk * 7);
        for (bool acc : {false, true}) {
          auto c1 = random_vector(m * n, 99);
          auto c2 = c1;
          s.gemm(m, n, kk, a.data(), kk, b.data(), n, c1.data(), n, acc);
          v->gemm(m, n, kk, a.data(), kk, b.data(), n, c2.data(), n, acc);
          EXPECT_LE(max_rel_diff(c1, c2), 1e-13) << m << "x" << n << "x" << kk << " acc=" << acc;
        }
      }
    }
  }
}

TEST_F(KernelEquivalence, VectorKernelsMatchScalar) {
  const auto& s = k::scalar_table();
  const auto* v = k::avx2_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 15u, 16u, 17u, 1000u}) {
    const auto x = random_vector(n, n + 1);
    const auto y = random_vector(n, n + 2);
    EXPECT_NEAR(s.dot(x.data(), y.data(), n), v->dot(x.data(), y.data(), n), 1e-12 * (1.0 + n));
    auto y1 = y, y2 = y;
    s.axpy(0.37, x.data(), y1.data(), n);
    v->axpy(0.37, x.data(), y2.data(), n);
    EXPECT_LE(max_rel_diff(y1, y2), 1e-15);
    s.scale(-1.5, y1.data(), n);
    v->scale(-1.5, y2.data(), n);
    EXPECT_LE(max_rel_diff(y1, y2), 1e-15);
  }
}

TEST_F(KernelEquivalence, DenseRoutinesAgreeUnderEitherTable) {
  Rng rng(5);
  const Matrix a = gaussian_matrix(40, 40, rng);
  const Matrix b = gaussian_matrix(40, 23, rng);
  ASSERT_TRUE(k::select(k::Isa::Scalar));
  const Matrix p1 = matmul(a, b);
  const QR q1 = qr(b);
  ASSERT_TRUE(k::select(k::Isa::Avx2));
  const Matrix p2 = matmul(a, b);
  const QR q2 = qr(b);
  EXPECT_LE(frobenius_norm(p1 - p2), 1e-13 * frobenius_norm(p1));
  EXPECT_LE(frobenius_norm(q1.q - q2.q), 1e-12);
}

TEST(KernelDispatch, ScalarAlwaysSelectable) {
  const k::Isa saved = k::active().isa;
  EXPECT_TRUE(k::select(k::Isa::Scalar));
  EXPECT_EQ(k::active().isa, k::Isa::Scalar);
  EXPECT_EQ(k::active().name, k::scalar_table().name);
  k::select(saved);
}
