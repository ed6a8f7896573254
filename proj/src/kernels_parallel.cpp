#include <cmath>
#include <cstddef>

#include "lscae/error.hpp"
#include "lscae/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lscae::kernels {

namespace {

using Index = std::ptrdiff_t;

void check_inner(std::size_t a, std::size_t b, const char* what) {
  if (a != b) fail(ErrorKind::ShapeMismatch, what);
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Matrix pairwise_sq_dist(const Matrix& x) {
  const Index n = static_cast<Index>(x.rows());
  const std::size_t d = x.cols();
  Matrix out(x.rows(), x.rows());
  // Upper triangle, mirrored. Rows near the top carry more work.
#pragma omp parallel for schedule(dynamic, 8)
  for (Index i = 0; i < n; ++i) {
    const double* xi = x.data() + i * d;
    for (Index j = i + 1; j < n; ++j) {
      const double* xj = x.data() + j * d;
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = xi[k] - xj[k];
        s += diff * diff;
      }
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

Matrix cross_sq_dist(const Matrix& x, const Matrix& centers) {
  check_inner(x.cols(), centers.cols(), "cross_sq_dist: column mismatch");
  const Index n = static_cast<Index>(x.rows());
  const std::size_t k = centers.rows();
  const std::size_t d = x.cols();
  Matrix out(x.rows(), k);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    const double* xi = x.data() + i * d;
    for (std::size_t c = 0; c < k; ++c) {
      const double* cc = centers.data() + c * d;
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        const double diff = xi[t] - cc[t];
        s += diff * diff;
      }
      out(i, c) = s;
    }
  }
  return out;
}

Matrix gaussian_from_sq_dist(const Matrix& sq_dist, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::ConfigInvalid, "kernel bandwidth must be positive");
  const double scale = -1.0 / (2.0 * sigma * sigma);
  Matrix out(sq_dist.rows(), sq_dist.cols());
  const Index total = static_cast<Index>(sq_dist.size());
  const double* src = sq_dist.data();
  double* dst = out.data();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < total; ++i) dst[i] = std::exp(src[i] * scale);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul: inner dimension mismatch");
  const Index m = static_cast<Index>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  Matrix out(a.rows(), n);
  // i-k-j order: the innermost loop is a contiguous axpy.
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m; ++i) {
    double* oi = out.data() + i * n;
    const double* ai = a.data() + i * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) oi[j] += aik * bk[j];
    }
  }
  return out;
}

Matrix matmul_abt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_abt: inner dimension mismatch");
  return matmul(a, b.transpose());
}

Matrix matmul_atb(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_atb: inner dimension mismatch");
  const std::size_t inner = a.rows();
  const Index m = static_cast<Index>(a.cols());
  const std::size_t n = b.cols();
  const std::size_t acols = a.cols();
  Matrix out(a.cols(), n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m; ++i) {
    double* oi = out.data() + i * n;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aki = a.data()[k * acols + i];
      if (aki == 0.0) continue;
      const double* bk = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) oi[j] += aki * bk[j];
    }
  }
  return out;
}

}  // namespace lscae::kernels
