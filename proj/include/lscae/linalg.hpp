#pragma once

#include <vector>

#include "lscae/matrix.hpp"

namespace lscae {

enum class EigenMethod {
  /// Jacobi for small matrices, TridiagonalQL above `kJacobiMaxDim`.
  Auto,
  /// Cyclic Jacobi rotations.
  Jacobi,
  /// Householder tridiagonalization followed by implicit-shift QL.
  TridiagonalQL,
};

inline constexpr std::size_t kJacobiMaxDim = 64;

struct SymEig {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i pairs with values[i]
};

/// Eigendecomposition of a symmetric matrix. Eigenvalues ascend; each
/// eigenvector's largest-magnitude entry is positive.
/// Throws NonSymmetric or NonFinite.
SymEig sym_eig(const Matrix& a, EigenMethod method = EigenMethod::Auto);

/// Eigenvalues only (ascending); skips eigenvector accumulation where possible.
std::vector<double> sym_eigvals(const Matrix& a, EigenMethod method = EigenMethod::Auto);

/// Validated squared-distance matrix between rows of `x` (NonFinite on bad input).
Matrix pairwise_sq_dist(const Matrix& x);

/// Lower-triangular L with A = L L^T. Throws DegenerateData if A is not
/// positive definite.
Matrix cholesky_lower(const Matrix& a);

/// Flips the sign of each column so its largest-magnitude entry is positive.
void fix_column_signs(Matrix& v);

}  // namespace lscae
