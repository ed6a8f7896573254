#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lscae/matrix.hpp"
#include "lscae/rng.hpp"

namespace lscae {

struct Dataset {
  Matrix x;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> feature_names;  // empty or one per column

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t d() const noexcept { return x.cols(); }
  /// 1 + largest label, or 0 without labels.
  int n_classes() const;
  /// Checks label range and name count; throws ShapeMismatch / RangeViolation.
  void validate() const;
};

/// Two interleaving unit half-circles; the second is shifted by (1, -0.5).
/// Rows [0, n/2) carry label 0, the rest label 1.
Dataset gen_two_moons(std::size_t n, double noise_sd, RngStream& stream);

/// Appends k columns of iid uniform(0,1) noise; existing columns are untouched.
Dataset add_nuisance_uniform(const Dataset& data, std::size_t k, RngStream& stream);

/// Two point-mass clusters at 0 and r on the first axis plus Gaussian nuisance axes.
struct CaseStudyConfig {
  std::size_t n_per_cluster = 50;
  double r = 1.0;
  std::size_t d_nuisance = 0;
  /// Per-coordinate sd. 1/sqrt(2) makes same-cluster squared distances chi^2_d.
  double noise_sd = 0.70710678118654752440;
};
Dataset gen_case_study(const CaseStudyConfig& cfg, RngStream& stream);

struct AblationConfig {
  std::size_t d = 3;
  std::size_t n = 1200;
  double moon_noise_sd = 0.1;
  /// Copy noise as a fraction of the source column's sd.
  double copy_noise = 0.1;
  /// Nuisance covariance C_ij = rho^|i-j|.
  double rho = -0.25;
  bool z_transform = true;
};
/// Columns: [moon x, moon y | noisy copies | nuisance block A | nuisance block B].
Dataset gen_ablation_moons(const AblationConfig& cfg, RngStream& stream);
Dataset gen_ablation_moons(std::size_t d, RngStream& stream);

Matrix toeplitz_covariance(std::size_t d, double rho);

/// clamp(x + pattern * mask, 0, 255) with one shared integer noise pattern
/// (uniform on {0..255}) and an iid Bernoulli(p_mask) mask per image.
/// Throws RangeViolation for pixels outside [0,255] or p_mask outside (0,1).
Matrix corrupt_images(const Matrix& images, double p_mask, RngStream& stream);
/// Deterministic core of `corrupt_images`; `mask` is n x p with 0/1 entries.
Matrix apply_corruption(const Matrix& images, std::span<const double> pattern, const Matrix& mask);

/// Handwritten-digit-style 8x8 images: ten stroke glyphs under random affine
/// jitter and stroke width, rasterized at 32x32 and block-summed to 8x8, then
/// scaled to integer pixels in [0,255]. Labels cycle 0..9.
struct DigitsConfig {
  std::size_t n = 1797;
};
Dataset gen_digits(const DigitsConfig& cfg, RngStream& stream);

struct ZTransform {
  Matrix x;
  std::vector<double> means;
  std::vector<double> sds;  // population sd
  std::vector<bool> zero_sd;
  bool any_zero_sd = false;
};
/// Per-column standardization; zero-sd columns become zeros and are flagged.
ZTransform z_transform(const Matrix& x);

}  // namespace lscae
