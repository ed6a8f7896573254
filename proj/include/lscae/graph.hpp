#pragma once

#include <cstddef>
#include <vector>

#include "lscae/matrix.hpp"

namespace lscae {

/// Gaussian kernel bandwidth: either the nearest-neighbor heuristic or a fixed value.
struct KernelConfig {
  enum class Mode { Heuristic, Fixed };

  Mode mode = Mode::Heuristic;
  double sigma = 0.0;

  static KernelConfig heuristic() { return {}; }
  static KernelConfig fixed(double sigma);
};

/// max_i min_{j != i} ||x_i - x_j||. Throws DegenerateData when the result is 0.
double sigma_heuristic(const Matrix& x);
double sigma_heuristic_from_sq_dist(const Matrix& sq_dist);

/// K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)); unit diagonal, dense.
Matrix gaussian_kernel(const Matrix& x, const KernelConfig& cfg);

/// L = D - K with D the diagonal of row sums.
Matrix unnormalized_laplacian(const Matrix& k);

/// D^{-1} K, the random-walk transition matrix. Throws ZeroRowSum.
Matrix diffusion_laplacian(const Matrix& k);

struct DiffusionSpectrum {
  std::vector<double> values;  // descending
  Matrix vectors;              // n x m, column i pairs with values[i], unit norm
};

/// Leading m eigenpairs of D^{-1} K, computed through the symmetric conjugate
/// D^{-1/2} K D^{-1/2} and mapped back with D^{-1/2}.
DiffusionSpectrum diffusion_spectrum(const Matrix& k, std::size_t m);

/// Feature matrix with every column centered and scaled to unit Euclidean norm.
/// Zero-variance columns are left as zeros and flagged.
struct NormalizedFeatures {
  Matrix x;
  std::vector<bool> zero_variance;
};
NormalizedFeatures normalize_features(const Matrix& x);

struct LaplacianScores {
  std::vector<double> scores;      // f^T L_un f per feature, +inf for constant features
  std::vector<std::size_t> order;  // ascending score, best first
};

/// Classical Laplacian score. Features are normalized first and the kernel is
/// built on the normalized matrix, so scores are invariant to per-feature
/// affine rescaling.
LaplacianScores laplacian_score_rank(const Matrix& x, const KernelConfig& cfg);

/// f^T L_diff f per normalized feature (larger = more structured); -inf for
/// constant features.
std::vector<double> feature_contribution(const Matrix& x, const KernelConfig& cfg);

struct SpectralSummary {
  double lambda2_diff = 0.0;  // second-largest eigenvalue of L_diff
  double fiedler = 0.0;       // second-smallest eigenvalue of L_un
  std::vector<double> psi2;   // second leading diffusion eigenvector
};

SpectralSummary spectral_summary(const Matrix& x, const KernelConfig& cfg);
SpectralSummary spectral_summary_from_kernel(const Matrix& k);

/// Projection of the centered data onto its top two principal directions.
Matrix pca_top2(const Matrix& x);

}  // namespace lscae
