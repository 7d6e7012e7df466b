#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels behind the dense module. Each kernel has a portable scalar
// reference and, on x86-64, an AVX2+FMA variant; the active table is chosen once
// at startup from CPUID and can be pinned with TRIVOPT_SIMD=scalar|avx2.
namespace trivopt::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  // C (m×n, row stride ldc) = A (m×k, lda) · B (k×n, ldb), or C += A·B when accumulate.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc, bool accumulate);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = alpha y
  void (*scale)(double alpha, double* y, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

bool cpu_supports_avx2() noexcept;

const KernelTable& active() noexcept;
// Pins the table used by every subsequent dense operation. Returns false (and
// leaves the selection unchanged) if the requested ISA is unavailable.
bool select(Isa isa) noexcept;

}  // namespace trivopt::kernels
