#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace trivopt::kernels {
namespace {

const KernelTable* initial_table() noexcept {
  const KernelTable* avx2 = avx2_table();
  if (const char* env = std::getenv("TRIVOPT_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && avx2 != nullptr) return avx2;
  }
  return avx2 != nullptr ? avx2 : &scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

bool cpu_supports_avx2() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* avx2_table() noexcept {
  return cpu_supports_avx2() ? avx2_table_compiled() : nullptr;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(Isa isa) noexcept {
  const KernelTable* t = isa == Isa::Scalar ? &scalar_table() : avx2_table();
  if (t == nullptr) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace trivopt::kernels
