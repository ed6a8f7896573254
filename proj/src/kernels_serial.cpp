#include <cmath>

#include "lscae/error.hpp"
#include "lscae/kernels.hpp"

namespace lscae::kernels::serial {

Matrix pairwise_sq_dist(const Matrix& x) {
  Matrix out(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) {
        const double diff = x(i, k) - x(j, k);
        s += diff * diff;
      }
      out(i, j) = s;
    }
  return out;
}

Matrix cross_sq_dist(const Matrix& x, const Matrix& centers) {
  if (x.cols() != centers.cols()) fail(ErrorKind::ShapeMismatch, "cross_sq_dist");
  Matrix out(x.rows(), centers.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < x.cols(); ++t) {
        const double diff = x(i, t) - centers(c, t);
        s += diff * diff;
      }
      out(i, c) = s;
    }
  return out;
}

Matrix gaussian_from_sq_dist(const Matrix& sq_dist, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::ConfigInvalid, "kernel bandwidth must be positive");
  Matrix out(sq_dist.rows(), sq_dist.cols());
  for (std::size_t i = 0; i < sq_dist.rows(); ++i)
    for (std::size_t j = 0; j < sq_dist.cols(); ++j)
      out(i, j) = std::exp(-sq_dist(i, j) / (2.0 * sigma * sigma));
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::ShapeMismatch, "matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

Matrix matmul_abt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) fail(ErrorKind::ShapeMismatch, "matmul_abt");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      out(i, j) = s;
    }
  return out;
}

Matrix matmul_atb(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) fail(ErrorKind::ShapeMismatch, "matmul_atb");
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

}  // namespace lscae::kernels::serial
