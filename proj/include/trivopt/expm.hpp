#pragma once

#include <array>

#include "trivopt/dense/matrix.hpp"

namespace trivopt {

// How expm evaluated its argument: exp(A) = T_d(2^{-s} A)^{2^s}.
struct ExpmReport {
  int scaling_exponent = 0;
  int taylor_degree = 0;
  double input_norm = 0.0;  // Frobenius norm of A
};

inline constexpr std::array<int, 6> kTaylorDegrees{1, 2, 4, 8, 12, 18};

// Largest Frobenius norm at which the degree-d polynomial is used without
// further scaling. Throws DomainError for an unsupported degree.
double taylor_threshold(int degree);

// Degree-d truncated Taylor polynomial of exp evaluated at A (no scaling).
// Exposed for testing the individual evaluation schemes.
Matrix taylor_polynomial(const Matrix& a, int degree);

Matrix expm(const Matrix& a, ExpmReport* report = nullptr);

// Fréchet derivative of exp at X in direction E, read off the top-right block
// of exp([[X, E], [0, X]]).
Matrix dexpm(const Matrix& x, const Matrix& e);

// Adjoint of E ↦ dexpm(X, E) under the Frobenius inner product.
Matrix adjoint_dexpm(const Matrix& x, const Matrix& g);

// Principal logarithm of a symmetric positive definite matrix.
Matrix logm_spd(const Matrix& p);

}  // namespace trivopt
