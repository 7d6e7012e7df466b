#pragma once

#include "trivopt/dense/kernels.hpp"

namespace trivopt::kernels {

// Defined in kernels_avx2.cpp, which is the only translation unit built with
// -mavx2 -mfma. Returns nullptr when that file was compiled without AVX2.
const KernelTable* avx2_table_compiled() noexcept;

}  // namespace trivopt::kernels
