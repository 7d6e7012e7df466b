#include "kernels_impl.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace trivopt::kernels {
namespace {

// 4×8 register tile: rows i..i+3 of C, columns j..j+7 (two ymm per row).
inline void tile_4x8(std::size_t k, const double* a, std::size_t lda, const double* b,
                     std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  __m256d c00, c01, c10, c11, c20, c21, c30, c31;
  if (accumulate) {
    c00 = _mm256_loadu_pd(c);
    c01 = _mm256_loadu_pd(c + 4);
    c10 = _mm256_loadu_pd(c + ldc);
    c11 = _mm256_loadu_pd(c + ldc + 4);
    c20 = _mm256_loadu_pd(c + 2 * ldc);
    c21 = _mm256_loadu_pd(c + 2 * ldc + 4);
    c30 = _mm256_loadu_pd(c + 3 * ldc);
    c31 = _mm256_loadu_pd(c + 3 * ldc + 4);
  } else {
    c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * ldb);
    const __m256d b1 = _mm256_loadu_pd(b + p * ldb + 4);
    __m256d av = _mm256_broadcast_sd(a + p);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(a + lda + p);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(a + 2 * lda + p);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(a + 3 * lda + p);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  _mm256_storeu_pd(c, c00);
  _mm256_storeu_pd(c + 4, c01);
  _mm256_storeu_pd(c + ldc, c10);
  _mm256_storeu_pd(c + ldc + 4, c11);
  _mm256_storeu_pd(c + 2 * ldc, c20);
  _mm256_storeu_pd(c + 2 * ldc + 4, c21);
  _mm256_storeu_pd(c + 3 * ldc, c30);
  _mm256_storeu_pd(c + 3 * ldc + 4, c31);
}

// One row of C against columns j..j+3.
inline void tile_1x4(std::size_t k, const double* a, const double* b, std::size_t ldb,
                     double* c, bool accumulate) {
  __m256d acc = accumulate ? _mm256_loadu_pd(c) : _mm256_setzero_pd();
  for (std::size_t p = 0; p < k; ++p) {
    acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p), _mm256_loadu_pd(b + p * ldb), acc);
  }
  _mm256_storeu_pd(c, acc);
}

inline void tile_1x1(std::size_t k, const double* a, const double* b, std::size_t ldb,
                     double* c, bool accumulate) {
  double s = accumulate ? *c : 0.0;
  for (std::size_t p = 0; p < k; ++p) s = __builtin_fma(a[p], b[p * ldb], s);
  *c = s;
}

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, bool accumulate) {
  const std::size_t m4 = m - m % 4;
  const std::size_t n8 = n - n % 8;
  for (std::size_t i = 0; i < m4; i += 4) {
    for (std::size_t j = 0; j < n8; j += 8) {
      tile_4x8(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc, accumulate);
    }
    for (std::size_t r = i; r < i + 4; ++r) {
      std::size_t j = n8;
      for (; j + 4 <= n; j += 4) tile_1x4(k, a + r * lda, b + j, ldb, c + r * ldc + j, accumulate);
      for (; j < n; ++j) tile_1x1(k, a + r * lda, b + j, ldb, c + r * ldc + j, accumulate);
    }
  }
  for (std::size_t r = m4; r < m; ++r) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) tile_1x4(k, a + r * lda, b + j, ldb, c + r * ldc + j, accumulate);
    for (; j < n; ++j) tile_1x1(k, a + r * lda, b + j, ldb, c + r * ldc + j, accumulate);
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s = __builtin_fma(x[i], y[i], s);
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = __builtin_fma(alpha, x[i], y[i]);
}

void scale_avx2(double alpha, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] *= alpha;
}

constexpr KernelTable kAvx2{Isa::Avx2, "avx2", &gemm_avx2, &dot_avx2, &axpy_avx2,
                            &scale_avx2};

}  // namespace

const KernelTable* avx2_table_compiled() noexcept { return &kAvx2; }

}  // namespace trivopt::kernels

#else

namespace trivopt::kernels {
const KernelTable* avx2_table_compiled() noexcept { return nullptr; }
}  // namespace trivopt::kernels

#endif
