#include <gtest/gtest.h>

#include <cmath>

#include "trivopt/dense/linalg.hpp"
#include "trivopt/random.hpp"

using namespace trivopt;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  return gaussian_matrix(r, c, rng);
}

}  // namespace

TEST(Matmul, IdentityIsNeutral) {
  const Matrix a = random_matrix(3, 3, 1);
  EXPECT_EQ(matmul(Matrix::identity(3), a), a);
}

TEST(Matmul, HandExpandedProduct) {
  const Matrix p = matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{0, 1}, {1, 0}});
  EXPECT_EQ(p, (Matrix{{2, 1}, {4, 3}}));
}

TEST(Matmul, Associativity) {
  const Matrix a = random_matrix(8, 8, 2), b = random_matrix(8, 8, 3), c = random_matrix(8, 8, 4);
  const Matrix l = matmul(matmul(a, b), c);
  const Matrix r = matmul(a, matmul(b, c));
  EXPECT_LE(frobenius_norm(l - r), 1e-13 * frobenius_norm(l));
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST(Matmul, TransposedVariantsAgree) {
  const Matrix a = random_matrix(5, 4, 5), b = random_matrix(5, 3, 6), c = random_matrix(6, 4, 7);
  EXPECT_LE(frobenius_norm(matmul_tn(a, b) - matmul(a.transpose(), b)), 1e-13);
  EXPECT_LE(frobenius_norm(matmul_nt(a, c) - matmul(a, c.transpose())), 1e-13);
}

TEST(Matrix, RejectsNonFiniteLiteral) {
  EXPECT_THROW((Matrix{{1.0, std::nan("")}}), Error);
  EXPECT_THROW((Matrix{{1.0, 2.0}, {3.0}}), ShapeError);
}

TEST(Matrix, FrobeniusSubmultiplicative) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix a = random_matrix(6, 4, 100 + s), b = random_matrix(4, 5, 200 + s);
    EXPECT_LE(frobenius_norm(matmul(a, b)), frobenius_norm(a) * frobenius_norm(b) * (1 + 1e-15));
  }
}

TEST(QR, IdentityFactorsTrivially) {
  const QR f = qr(Matrix::identity(4));
  EXPECT_EQ(f.q, Matrix::identity(4));
  EXPECT_EQ(f.r, Matrix::identity(4));
}

TEST(QR, ThreeFourFive) {
  const QR f = qr(Matrix{{3}, {4}});
  EXPECT_NEAR(f.q(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(f.q(1, 0), 0.8, 1e-15);
  EXPECT_NEAR(f.r(0, 0), 5.0, 1e-14);
}

TEST(QR, ReconstructionAndOrthonormality) {
  const Matrix a = random_matrix(6, 3, 9);
  const QR f = qr(a);
  EXPECT_LE(orthonormality_residual(f.q), 1e-12);
  EXPECT_LE(frobenius_norm(matmul(f.q, f.r) - a), 1e-12 * frobenius_norm(a));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_GE(f.r(i, i), 0.0);
    for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(f.r(i, j), 0.0);
  }
}

TEST(QR, OrthonormalOverManySeeds) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const std::size_t n = 1 + s % 64;
    const std::size_t k = 1 + (s * 7) % n;
    EXPECT_LE(orthonormality_residual(qr(random_matrix(n, k, s)).q), 1e-12) << "seed " << s;
  }
}

TEST(QR, RankDeficientAllowed) {
  Matrix a(4, 2);
  for (std::size_t i = 0; i < 4; ++i) a(i, 0) = a(i, 1) = 1.0 + static_cast<double>(i);
  const QR f = qr(a);
  EXPECT_NEAR(f.r(1, 1), 0.0, 1e-12);
  EXPECT_LE(frobenius_norm(matmul(f.q, f.r) - a), 1e-12 * frobenius_norm(a));
}

TEST(SymEig, DiagonalInput) {
  const SymEig e = sym_eig(Matrix{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}});
  ASSERT_EQ(e.values.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.values[i], i + 1.0, 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(e.vectors(i, i)), 1.0, 1e-15);
}

TEST(SymEig, TwoByTwo) {
  const SymEig e = sym_eig(Matrix{{2, 1}, {1, 2}});
  EXPECT_NEAR(e.values[0], 1.0, 1e-14);
  EXPECT_NEAR(e.values[1], 3.0, 1e-14);
}

TEST(SymEig, Reconstruction) {
  const Matrix s = sym_part(random_matrix(8, 8, 11));
  const SymEig e = sym_eig(s);
  const Matrix rec = matmul(e.vectors, matmul_nt(Matrix::diagonal(e.values), e.vectors));
  EXPECT_LE(frobenius_norm(rec - s), 1e-12 * frobenius_norm(s));
  EXPECT_LE(orthonormality_residual(e.vectors), 1e-12);
  EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
}

TEST(SymEig, AsymmetricInputRejected) {
  EXPECT_THROW(sym_eig(Matrix{{1, 2}, {0, 1}}), ContractError);
}

TEST(SVD, Identity) {
  const SVD s = svd(Matrix::identity(3));
  for (double v : s.sigma) EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_LE(frobenius_norm(matmul(s.u, s.v.transpose()) - Matrix::identity(3)), 1e-14);
}

TEST(SVD, Permutation) {
  const SVD s = svd(Matrix{{0, 1}, {1, 0}});
  EXPECT_NEAR(s.sigma[0], 1.0, 1e-15);
  EXPECT_NEAR(s.sigma[1], 1.0, 1e-15);
}

TEST(SVD, Reconstruction) {
  for (auto [r, c] : {std::pair{5, 3}, {3, 5}}) {
    const Matrix a = random_matrix(r, c, 12);
    const SVD s = svd(a);
    const Matrix rec = matmul(s.u, matmul_nt(Matrix::diagonal(s.sigma), s.v));
    EXPECT_LE(frobenius_norm(rec - a), 1e-11 * frobenius_norm(a));
    EXPECT_LE(orthonormality_residual(s.u), 1e-12);
    EXPECT_LE(orthonormality_residual(s.v), 1e-12);
    EXPECT_TRUE(std::is_sorted(s.sigma.rbegin(), s.sigma.rend()));
    for (double v : s.sigma) EXPECT_GE(v, 0.0);
  }
}

TEST(Solve, Identity) {
  const Matrix b = random_matrix(3, 2, 13);
  EXPECT_EQ(solve(Matrix::identity(3), b), b);
}

TEST(Solve, Diagonal) {
  const Matrix x = solve(Matrix{{2, 0}, {0, 4}}, Matrix{{2}, {8}});
  EXPECT_NEAR(x(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(x(1, 0), 2.0, 1e-15);
}

TEST(Solve, ResidualOnWellConditioned) {
  Matrix a = random_matrix(10, 10, 14);
  for (std::size_t i = 0; i < 10; ++i) a(i, i) += 10.0;
  const Matrix b = random_matrix(10, 3, 15);
  const Matrix x = solve(a, b);
  EXPECT_LE(frobenius_norm(matmul(a, x) - b), 1e-10 * frobenius_norm(b));
}

TEST(Solve, SingularCarriesPivot) {
  try {
    solve(Matrix{{1, 2}, {2, 4}}, Matrix{{1}, {1}});
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_EQ(e.pivot(), 1u);
  }
}

TEST(Determinant, KnownValues) {
  EXPECT_NEAR(determinant(Matrix{{1, 2}, {3, 4}}), -2.0, 1e-14);
  EXPECT_NEAR(determinant(Matrix::identity(5)), 1.0, 1e-15);
}
