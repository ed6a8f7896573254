#pragma once

#include "lscae/matrix.hpp"

// Data-parallel numeric kernels. The functions in `lscae::kernels` are
// OpenMP-parallel over output rows; every output element is produced by one
// thread with a fixed summation order, so results are bit-identical for any
// thread count. `lscae::kernels::serial` holds plain-loop reference versions
// used by the tests and the benchmark.

namespace lscae::kernels {

/// Squared Euclidean distances between rows: out(i,j) = sum_k (x_ik - x_jk)^2.
Matrix pairwise_sq_dist(const Matrix& x);
/// Squared distances from each row of `x` to each row of `centers` (n x k).
Matrix cross_sq_dist(const Matrix& x, const Matrix& centers);
/// Elementwise exp(-d / (2 sigma^2)).
Matrix gaussian_from_sq_dist(const Matrix& sq_dist, double sigma);
/// A * B.
Matrix matmul(const Matrix& a, const Matrix& b);
/// A * B^T.
Matrix matmul_abt(const Matrix& a, const Matrix& b);
/// A^T * B.
Matrix matmul_atb(const Matrix& a, const Matrix& b);

namespace serial {

Matrix pairwise_sq_dist(const Matrix& x);
Matrix cross_sq_dist(const Matrix& x, const Matrix& centers);
Matrix gaussian_from_sq_dist(const Matrix& sq_dist, double sigma);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_abt(const Matrix& a, const Matrix& b);
Matrix matmul_atb(const Matrix& a, const Matrix& b);

}  // namespace serial

/// Number of OpenMP threads kernels will use (1 when built without OpenMP).
int max_threads();

}  // namespace lscae::kernels
