#include "lscae/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lscae/error.hpp"
#include "lscae/linalg.hpp"

namespace lscae {

int Dataset::n_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

void Dataset::validate() const {
  if (labels) {
    if (labels->size() != x.rows()) fail(ErrorKind::ShapeMismatch, "label count != rows");
    for (int y : *labels)
      if (y < 0) fail(ErrorKind::RangeViolation, "labels must be non-negative");
  }
  if (!feature_names.empty() && feature_names.size() != x.cols())
    fail(ErrorKind::ShapeMismatch, "feature name count != columns");
}

namespace {

std::vector<std::string> indexed_names(const std::string& prefix, std::size_t count,
                                       std::size_t start = 0) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) names.push_back(prefix + std::to_string(start + i));
  return names;
}

}  // namespace

Dataset gen_two_moons(std::size_t n, double noise_sd, RngStream& stream) {
  if (n < 4 || n % 2 != 0) fail(ErrorKind::ConfigInvalid, "two moons needs even n >= 4");
  if (!(noise_sd >= 0.0)) fail(ErrorKind::ConfigInvalid, "noise sd must be non-negative");
  const std::size_t half = n / 2;
  Dataset out{Matrix(n, 2), std::vector<int>(n, 0), {"x", "y"}};
  for (std::size_t i = 0; i < half; ++i) {
    const double t = std::numbers::pi * static_cast<double>(i) / static_cast<double>(half - 1);
    out.x(i, 0) = std::cos(t);
    out.x(i, 1) = std::sin(t);
    out.x(half + i, 0) = 1.0 - std::cos(t);
    out.x(half + i, 1) = 0.5 - std::sin(t);
    (*out.labels)[half + i] = 1;
  }
  if (noise_sd > 0.0)
    for (double& v : out.x.values()) v += noise_sd * stream.normal();
  return out;
}

Dataset add_nuisance_uniform(const Dataset& data, std::size_t k, RngStream& stream) {
  Dataset out;
  out.labels = data.labels;
  out.x = Matrix(data.n(), data.d() + k);
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::copy(data.x.row(i).begin(), data.x.row(i).end(), out.x.row(i).begin());
    for (std::size_t j = 0; j < k; ++j) out.x(i, data.d() + j) = stream.uniform01();
  }
  if (!data.feature_names.empty() || k > 0) {
    out.feature_names =
        data.feature_names.empty() ? indexed_names("f", data.d()) : data.feature_names;
    const auto extra = indexed_names("nuisance", k);
    out.feature_names.insert(out.feature_names.end(), extra.begin(), extra.end());
  }
  return out;
}

Dataset gen_case_study(const CaseStudyConfig& cfg, RngStream& stream) {
  if (cfg.n_per_cluster == 0 || !(cfg.r > 0.0) || !(cfg.noise_sd > 0.0))
    fail(ErrorKind::ConfigInvalid, "case study needs n_per_cluster > 0, r > 0, noise_sd > 0");
  const std::size_t n = 2 * cfg.n_per_cluster;
  Dataset out{Matrix(n, 1 + cfg.d_nuisance), std::vector<int>(n, 0), {}};
  out.feature_names = indexed_names("nuisance", cfg.d_nuisance);
  out.feature_names.insert(out.feature_names.begin(), "signal");
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = i >= cfg.n_per_cluster;
    out.x(i, 0) = second ? cfg.r : 0.0;
    (*out.labels)[i] = second ? 1 : 0;
    for (std::size_t j = 0; j < cfg.d_nuisance; ++j) out.x(i, 1 + j) = cfg.noise_sd * stream.normal();
  }
  return out;
}

Matrix toeplitz_covariance(std::size_t d, double rho) {
  Matrix c(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      c(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
  return c;
}

Dataset gen_ablation_moons(const AblationConfig& cfg, RngStream& stream) {
  if (cfg.d == 0) fail(ErrorKind::ConfigInvalid, "ablation moons needs d >= 1");
  if (cfg.n < 4 || cfg.n % 2 != 0) fail(ErrorKind::ConfigInvalid, "ablation moons needs even n >= 4");
  RngStream moon_stream = stream.split(1);
  RngStream copy_stream = stream.split(2);
  RngStream nuisance_stream = stream.split(3);

  const Dataset moons = gen_two_moons(cfg.n, cfg.moon_noise_sd, moon_stream);
  const Matrix chol = cholesky_lower(toeplitz_covariance(cfg.d, cfg.rho));
  const std::size_t width = 2 * cfg.d + 4;
  Dataset out{Matrix(cfg.n, width), moons.labels, {}};

  double col_sd[2];
  for (std::size_t j = 0; j < 2; ++j) {
    const auto col = moons.x.column(j);
    double m = 0.0;
    for (double v : col) m += v;
    m /= static_cast<double>(cfg.n);
    double s = 0.0;
    for (double v : col) s += (v - m) * (v - m);
    col_sd[j] = std::sqrt(s / static_cast<double>(cfg.n));
  }

  std::vector<double> u(cfg.d);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      out.x(i, j) = moons.x(i, j);
      out.x(i, 2 + j) = moons.x(i, j) + cfg.copy_noise * col_sd[j] * copy_stream.normal();
    }
    for (std::size_t block = 0; block < 2; ++block) {
      for (double& v : u) v = nuisance_stream.normal();
      for (std::size_t a = 0; a < cfg.d; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b <= a; ++b) s += chol(a, b) * u[b];
        out.x(i, 4 + block * cfg.d + a) = s;
      }
    }
  }
  out.feature_names = {"moon_x", "moon_y", "copy_x", "copy_y"};
  for (const auto& name : indexed_names("nuisA_", cfg.d)) out.feature_names.push_back(name);
  for (const auto& name : indexed_names("nuisB_", cfg.d)) out.feature_names.push_back(name);
  if (cfg.z_transform) out.x = z_transform(out.x).x;
  return out;
}

Dataset gen_ablation_moons(std::size_t d, RngStream& stream) {
  AblationConfig cfg;
  cfg.d = d;
  return gen_ablation_moons(cfg, stream);
}

Matrix apply_corruption(const Matrix& images, std::span<const double> pattern, const Matrix& mask) {
  if (pattern.size() != images.cols()) fail(ErrorKind::ShapeMismatch, "noise pattern width");
  require_same_shape(images, mask, "corruption mask");
  Matrix out(images.rows(), images.cols());
  for (std::size_t i = 0; i < images.rows(); ++i)
    for (std::size_t j = 0; j < images.cols(); ++j) {
      const double v = images(i, j);
      if (!(v >= 0.0 && v <= 255.0)) fail(ErrorKind::RangeViolation, "pixel outside [0,255]");
      out(i, j) = std::clamp(v + pattern[j] * mask(i, j), 0.0, 255.0);
    }
  return out;
}

Matrix corrupt_images(const Matrix& images, double p_mask, RngStream& stream) {
  if (!(p_mask > 0.0 && p_mask < 1.0)) fail(ErrorKind::RangeViolation, "p_mask must lie in (0,1)");
  std::vector<double> pattern(images.cols());
  for (double& v : pattern) v = static_cast<double>(stream.uniform_index(256));
  Matrix mask(images.rows(), images.cols());
  for (double& v : mask.values()) v = stream.bernoulli(p_mask) ? 1.0 : 0.0;
  return apply_corruption(images, pattern, mask);
}

ZTransform z_transform(const Matrix& x) {
  require_finite(x, "z_transform input");
  ZTransform out{Matrix(x.rows(), x.cols()), std::vector<double>(x.cols(), 0.0),
                 std::vector<double>(x.cols(), 0.0), std::vector<bool>(x.cols(), false), false};
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = std::sqrt(var / n);
    out.means[j] = mean;
    out.sds[j] = sd;
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      out.zero_sd[j] = true;
      out.any_zero_sd = true;
      continue;
    }
    for (std::size_t i = 0; i < x.rows(); ++i) out.x(i, j) = (x(i, j) - mean) / sd;
  }
  return out;
}

}  // namespace lscae
