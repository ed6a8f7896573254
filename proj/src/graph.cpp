#include "lscae/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lscae/error.hpp"
#include "lscae/kernels.hpp"
#include "lscae/linalg.hpp"

namespace lscae {

namespace {

void require_square(const Matrix& k, const char* what) {
  if (!k.is_square() || k.rows() == 0)
    fail(ErrorKind::ShapeMismatch, std::string(what) + " requires a non-empty square matrix");
}

void require_symmetric_nonnegative(const Matrix& k, const char* what) {
  require_square(k, what);
  require_finite(k, what);
  const double tol = 1e-9 * std::max(1.0, max_abs(k));
  for (std::size_t i = 0; i < k.rows(); ++i) {
    for (std::size_t j = 0; j < k.cols(); ++j) {
      if (k(i, j) < 0.0) fail(ErrorKind::RangeViolation, std::string(what) + ": negative entry");
      if (j > i && std::abs(k(i, j) - k(j, i)) > tol)
        fail(ErrorKind::NonSymmetric, std::string(what) + ": kernel not symmetric");
    }
  }
}

std::vector<double> row_sums(const Matrix& k) {
  std::vector<double> d(k.rows(), 0.0);
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (double v : k.row(i)) d[i] += v;
  return d;
}

// v^T M v for a square M.
double quadratic_form(const Matrix& m, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double mi = 0.0;
    const auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) mi += row[j] * v[j];
    s += v[i] * mi;
  }
  return s;
}

}  // namespace

KernelConfig KernelConfig::fixed(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    fail(ErrorKind::ConfigInvalid, "fixed sigma must be finite and positive");
  return {Mode::Fixed, sigma};
}

double sigma_heuristic_from_sq_dist(const Matrix& sq_dist) {
  const std::size_t n = sq_dist.rows();
  if (n < 2) fail(ErrorKind::DegenerateData, "sigma heuristic needs at least two points");
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) nearest = std::min(nearest, sq_dist(i, j));
    worst = std::max(worst, nearest);
  }
  if (!(worst > 0.0))
    fail(ErrorKind::DegenerateData, "all points duplicated; supply a fixed sigma");
  return std::sqrt(worst);
}

double sigma_heuristic(const Matrix& x) { return sigma_heuristic_from_sq_dist(pairwise_sq_dist(x)); }

Matrix gaussian_kernel(const Matrix& x, const KernelConfig& cfg) {
  const Matrix d = pairwise_sq_dist(x);
  const double sigma =
      cfg.mode == KernelConfig::Mode::Fixed ? cfg.sigma : sigma_heuristic_from_sq_dist(d);
  if (!(sigma > 0.0)) fail(ErrorKind::ConfigInvalid, "sigma must be positive");
  return kernels::gaussian_from_sq_dist(d, sigma);
}

Matrix unnormalized_laplacian(const Matrix& k) {
  require_symmetric_nonnegative(k, "unnormalized_laplacian");
  const auto d = row_sums(k);
  Matrix l = -1.0 * k;
  for (std::size_t i = 0; i < k.rows(); ++i) l(i, i) += d[i];
  return l;
}

Matrix diffusion_laplacian(const Matrix& k) {
  require_square(k, "diffusion_laplacian");
  require_finite(k, "diffusion_laplacian");
  const auto d = row_sums(k);
  Matrix p(k.rows(), k.cols());
  for (std::size_t i = 0; i < k.rows(); ++i) {
    if (!(d[i] > 0.0)) fail(ErrorKind::ZeroRowSum, "kernel row " + std::to_string(i) + " sums to 0");
    for (std::size_t j = 0; j < k.cols(); ++j) p(i, j) = k(i, j) / d[i];
  }
  return p;
}

DiffusionSpectrum diffusion_spectrum(const Matrix& k, std::size_t m) {
  require_symmetric_nonnegative(k, "diffusion_spectrum");
  const std::size_t n = k.rows();
  if (m == 0 || m > n) fail(ErrorKind::ConfigInvalid, "diffusion_spectrum requires 1 <= m <= n");
  const auto d = row_sums(k);
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(d[i] > 0.0)) fail(ErrorKind::ZeroRowSum, "kernel row " + std::to_string(i) + " sums to 0");
    inv_sqrt[i] = 1.0 / std::sqrt(d[i]);
  }
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = k(i, j) * inv_sqrt[i] * inv_sqrt[j];
      s(i, j) = v;
      s(j, i) = v;
    }
  const SymEig eig = sym_eig(s);

  DiffusionSpectrum out;
  out.values.resize(m);
  out.vectors = Matrix(n, m);
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t src = n - 1 - c;
    out.values[c] = eig.values[src];
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = eig.vectors(i, src) * inv_sqrt[i];
      out.vectors(i, c) = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, c) /= norm;
  }
  fix_column_signs(out.vectors);
  return out;
}

NormalizedFeatures normalize_features(const Matrix& x) {
  require_finite(x, "feature matrix");
  NormalizedFeatures out{Matrix(x.rows(), x.cols()), std::vector<bool>(x.cols(), false)};
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      mean += x(i, j);
      scale = std::max(scale, std::abs(x(i, j)));
    }
    mean /= n;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) norm2 += (x(i, j) - mean) * (x(i, j) - mean);
    const double norm = std::sqrt(norm2);
    if (norm <= 1e-12 * std::max(1.0, scale) * std::sqrt(n)) {
      out.zero_variance[j] = true;
      continue;
    }
    for (std::size_t i = 0; i < x.rows(); ++i) out.x(i, j) = (x(i, j) - mean) / norm;
  }
  return out;
}

LaplacianScores laplacian_score_rank(const Matrix& x, const KernelConfig& cfg) {
  const auto norm = normalize_features(x);
  const Matrix l = unnormalized_laplacian(gaussian_kernel(norm.x, cfg));
  LaplacianScores out;
  out.scores.resize(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    if (norm.zero_variance[j]) {
      out.scores[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    out.scores[j] = quadratic_form(l, norm.x.column(j));
  }
  out.order.resize(x.cols());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](auto a, auto b) { return out.scores[a] < out.scores[b]; });
  return out;
}

std::vector<double> feature_contribution(const Matrix& x, const KernelConfig& cfg) {
  const auto norm = normalize_features(x);
  const Matrix p = diffusion_laplacian(gaussian_kernel(norm.x, cfg));
  std::vector<double> out(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    out[j] = norm.zero_variance[j] ? -std::numeric_limits<double>::infinity()
                                   : quadratic_form(p, norm.x.column(j));
  }
  return out;
}

SpectralSummary spectral_summary_from_kernel(const Matrix& k) {
  if (k.rows() < 3) fail(ErrorKind::DegenerateData, "spectral_summary needs n >= 3");
  const DiffusionSpectrum diff = diffusion_spectrum(k, 2);
  const auto un = sym_eigvals(unnormalized_laplacian(k));
  SpectralSummary out;
  out.lambda2_diff = diff.values[1];
  out.fiedler = un[1];
  out.psi2 = diff.vectors.column(1);
  return out;
}

SpectralSummary spectral_summary(const Matrix& x, const KernelConfig& cfg) {
  if (x.rows() < 3) fail(ErrorKind::DegenerateData, "spectral_summary needs n >= 3");
  return spectral_summary_from_kernel(gaussian_kernel(x, cfg));
}

Matrix pca_top2(const Matrix& x) {
  if (x.rows() < 3 || x.cols() < 2) fail(ErrorKind::DegenerateData, "pca_top2 needs n >= 3, d >= 2");
  require_finite(x, "pca input");
  Matrix centered = x;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) centered(i, j) -= mean;
  }
  Matrix cov = kernels::matmul_atb(centered, centered);
  const double denom = 1.0 / static_cast<double>(x.rows() - 1);
  for (double& v : cov.values()) v *= denom;
  const SymEig eig = sym_eig(cov);
  const std::size_t d = x.cols();
  const double top = eig.values[d - 1];
  const double second = eig.values[d - 2];
  if (!(second > 1e-12 * std::max(1.0, top)))
    fail(ErrorKind::DegenerateData, "covariance rank below 2");
  Matrix basis(d, 2);
  for (std::size_t i = 0; i < d; ++i) {
    basis(i, 0) = eig.vectors(i, d - 1);
    basis(i, 1) = eig.vectors(i, d - 2);
  }
  return kernels::matmul(centered, basis);
}

}  // namespace lscae
