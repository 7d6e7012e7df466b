#pragma once

#include <functional>
#include <vector>

#include "trivopt/dense/matrix.hpp"

namespace trivopt {

struct QR {
  Matrix q;  // rows × cols, orthonormal columns
  Matrix r;  // cols × cols, upper triangular with non-negative diagonal
};

// Thin Householder QR of a tall matrix (rows ≥ cols). Rank-deficient input is
// allowed; the corresponding R diagonal entries come out (near) zero.
QR qr(const Matrix& a);

struct SymEig {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns are eigenvectors
};

// Cyclic Jacobi eigensolver for symmetric matrices. Throws ContractError if
// ‖S − Sᵀ‖_F > 1e-10 ‖S‖_F.
SymEig sym_eig(const Matrix& s);

struct SVD {
  Matrix u;                    // rows × p, p = min(rows, cols)
  std::vector<double> sigma;   // non-negative, descending
  Matrix v;                    // cols × p
};

// Thin SVD by one-sided (Hestenes) Jacobi.
SVD svd(const Matrix& a);

// Solves A X = B by LU with partial pivoting. Throws SingularityError when a
// pivot falls below 1e-13 ‖A‖_F.
Matrix solve(const Matrix& a, const Matrix& b);
Matrix inverse(const Matrix& a);
double determinant(const Matrix& a);

// V diag(f(λ)) Vᵀ for symmetric S = V diag(λ) Vᵀ.
Matrix sym_apply(const SymEig& eig, const std::function<double(double)>& f);
Matrix sym_apply(const Matrix& s, const std::function<double(double)>& f);

}  // namespace trivopt
