#pragma once

#include <cstdint>
#include <random>

#include "trivopt/dense/matrix.hpp"

namespace trivopt {

using Rng = std::mt19937_64;

// Entries i.i.d. N(0, stddev²).
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0);

// Gaussian matrix rescaled to unit Frobenius norm.
Matrix unit_gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace trivopt
