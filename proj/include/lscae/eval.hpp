#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lscae/datasets.hpp"
#include "lscae/graph.hpp"
#include "lscae/matrix.hpp"
#include "lscae/rng.hpp"
#include "lscae/train.hpp"

namespace lscae {

struct KmeansResult {
  std::vector<int> assignments;
  Matrix centroids;  // k x d
  double inertia = 0.0;
  std::size_t iterations = 0;  // Lloyd iterations of the returned run
};

/// Called after every Lloyd update with (restart, iteration, inertia).
using InertiaObserver = std::function<void(std::size_t, std::size_t, double)>;

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or 300 iterations; the lowest-inertia restart wins. An empty
/// cluster is re-seeded at the point farthest from its current centroid.
KmeansResult kmeans(const Matrix& x, std::size_t k, std::size_t restarts, RngStream& stream,
                    const InertiaObserver& observer = {});

/// Maximum-weight perfect matching on a square matrix; returns col index per row.
std::vector<std::size_t> max_weight_assignment(const Matrix& weights);

/// Best agreement fraction over one-to-one relabelings of `pred`.
double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// A table of config points with mean and sd per metric.
struct ExperimentReport {
  struct Row {
    std::vector<std::string> keys;
    std::vector<double> means;
    std::vector<double> sds;
    std::size_t reps = 1;
  };

  std::string name;
  std::vector<std::string> key_names;
  std::vector<std::string> metric_names;
  std::vector<Row> rows;
  std::vector<std::pair<std::string, double>> summary;  // scalar results

  /// Header: keys, then <metric>_mean and <metric>_sd per metric, then reps.
  std::string to_csv() const;
  std::string to_json() const;
  const Row* find(const std::vector<std::string>& keys) const;
  double mean_of(const std::vector<std::string>& keys, const std::string& metric) const;
};

void write_text(const std::filesystem::path& path, const std::string& text);

/// Fresh uniform nuisance per (count, rep) on top of a fixed base dataset.
ExperimentReport spectral_sweep(const Dataset& base, const std::vector<std::size_t>& nuisance_counts,
                                std::size_t reps, std::uint64_t seed,
                                const KernelConfig& kernel = KernelConfig::heuristic());

struct BreakdownConfig {
  std::vector<double> r_values{4, 6, 8};
  std::vector<std::size_t> d_grid;  // empty: default geometric grid
  std::size_t n_per_cluster = 50;
  double noise_sd = 0.70710678118654752440;
  double threshold = 0.7;
  std::size_t reps = 5;
  std::uint64_t seed = 42;
};

std::vector<std::size_t> default_breakdown_grid();

struct BreakdownResult {
  ExperimentReport curves;   // (r, d) -> |corr(psi2, y)|
  ExperimentReport points;   // r -> d*
  double loglog_slope = 0.0; // nan with fewer than two finite d*
};

/// Centered moving average, window 3, shortened at the ends.
std::vector<double> moving_average3(const std::vector<double>& v);
/// First index whose value is below the threshold, if any.
std::optional<std::size_t> first_below(const std::vector<double>& v, double threshold);
/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

BreakdownResult breakdown_experiment(const BreakdownConfig& cfg);

/// Largest gamma allowed for 2n points to keep every within-cluster
/// nearest neighbor with probability 1 - eps.
double chi2_gamma(std::size_t n_per_cluster, double eps);
/// floor(((r^2 - 2 gamma) / (4 sqrt(gamma)))^2), 0 when r^2 <= 2 gamma.
std::size_t nuisance_budget(double r, double gamma);
/// True when every point's nearest neighbor carries its own label.
bool nearest_neighbor_pure(const Matrix& x, const std::vector<int>& labels);

struct AblationSpec {
  std::vector<std::size_t> d_values{3, 6};
  std::size_t reps = 10;
  std::vector<Objective> methods{Objective::LsCae, Objective::CaeOnly, Objective::LsOnly};
  LscaeConfig base;  // k forced to 2
  std::uint64_t seed = 42;
};

/// Success = both selected indices among the moon coordinates or their copies.
ExperimentReport ablation_run(const AblationSpec& spec);

/// Mean and sd of accuracy over `runs` independent single-restart k-means fits.
struct AccuracyStats {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t runs = 0;
};
AccuracyStats kmeans_accuracy(const Matrix& x, const std::vector<int>& labels, std::size_t clusters,
                              std::size_t runs, RngStream& stream);

enum class SelectionMethod { LsCae, CaeOnly, LsOnly, ClassicalLs, Random };
std::string to_string(SelectionMethod m);

struct BenchmarkSpec {
  std::vector<std::size_t> feature_counts{2};
  std::vector<SelectionMethod> methods{SelectionMethod::LsCae, SelectionMethod::CaeOnly,
                                       SelectionMethod::LsOnly, SelectionMethod::ClassicalLs,
                                       SelectionMethod::Random};
  std::size_t kmeans_runs = 20;
  std::size_t reps = 1;  // independent selection runs per (method, count)
  bool include_all_features = true;
  LscaeConfig base;
  std::uint64_t seed = 42;
};

/// Selected column indices for one method.
std::vector<std::size_t> select_features(const Dataset& data, SelectionMethod method,
                                         std::size_t count, const LscaeConfig& base,
                                         std::uint64_t seed);

/// Rows (method, count) with the mean accuracy across reps; the all-features
/// baseline appears as method "all" with count d.
ExperimentReport selection_benchmark(const Dataset& data, const BenchmarkSpec& spec);

}  // namespace lscae
