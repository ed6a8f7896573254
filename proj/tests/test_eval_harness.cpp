#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <json.hpp>

#include "lscae/datasets.hpp"
#include "lscae/error.hpp"
#include "lscae/eval.hpp"
#include "test_util.hpp"

namespace lscae {
namespace {

using test::kind_of;
using test::random_matrix;

double brute_force_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  const int p = *std::max_element(pred.begin(), pred.end()) + 1;
  const int t = *std::max_element(truth.begin(), truth.end()) + 1;
  const int size = std::max(p, t);
  std::vector<int> perm(static_cast<std::size_t>(size));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
      agree += perm[static_cast<std::size_t>(pred[i])] == truth[i];
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

double inertia_of(const Matrix& x, const std::vector<int>& assign, std::size_t k) {
  Matrix sums(k, x.cols());
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    counts[c] += 1.0;
    for (std::size_t j = 0; j < x.cols(); ++j) sums(c, j) += x(i, j);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double diff = x(i, j) - sums(c, j) / counts[c];
      s += diff * diff;
    }
  }
  return s;
}

TEST(Kmeans, TwoPointMasses) {
  Matrix x(20, 2);
  for (std::size_t i = 10; i < 20; ++i) x(i, 0) = 5.0;
  RngStream rng(1);
  const KmeansResult r = kmeans(x, 2, 3, rng);
  EXPECT_NEAR(r.inertia, 0.0, 1e-12);
  EXPECT_EQ(clustering_accuracy(r.assignments, std::vector<int>{0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                                                               1, 1, 1, 1, 1, 1, 1, 1, 1, 1}),
            1.0);
  std::vector<double> c0{r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(c0.begin(), c0.end());
  EXPECT_DOUBLE_EQ(c0[0], 0.0);
  EXPECT_DOUBLE_EQ(c0[1], 5.0);
}

TEST(Kmeans, ScatterAroundMasses) {
  const Matrix x{{0, 0}, {0, 1}, {10, 0}, {10, 1}};
  RngStream rng(2);
  const KmeansResult r = kmeans(x, 2, 5, rng);
  EXPECT_NEAR(r.inertia, 1.0, 1e-12);
}

TEST(Kmeans, OneClusterPerPoint) {
  const Matrix x = random_matrix(12, 3, 3);
  RngStream rng(3);
  EXPECT_NEAR(kmeans(x, 12, 1, rng).inertia, 0.0, 1e-12);
}

TEST(Kmeans, BeatsRandomAssignments) {
  const Matrix x = random_matrix(30, 2, 4);
  RngStream rng(4);
  const double ours = kmeans(x, 2, 10, rng).inertia;
  RngStream sampler(5);
  double best = INFINITY;
  for (int t = 0; t < 10000; ++t) {
    std::vector<int> assign(30);
    for (auto& a : assign) a = static_cast<int>(sampler.uniform_index(2));
    if (std::count(assign.begin(), assign.end(), 0) == 0 ||
        std::count(assign.begin(), assign.end(), 1) == 0)
      continue;
    best = std::min(best, inertia_of(x, assign, 2));
  }
  EXPECT_LE(ours, best + 1e-12);
}

TEST(Kmeans, InertiaNeverIncreases) {
  const Matrix x = random_matrix(200, 4, 6);
  RngStream rng(6);
  std::vector<std::vector<double>> traces(5);
  kmeans(x, 6, 5, rng, [&](std::size_t restart, std::size_t, double inertia) {
    traces[restart].push_back(inertia);
  });
  for (const auto& t : traces) {
    ASSERT_FALSE(t.empty());
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i], t[i - 1] * (1 + 1e-12));
  }
}

TEST(Kmeans, DeterministicAndValidated) {
  const Matrix x = random_matrix(50, 3, 7);
  RngStream a(9), b(9);
  const auto ra = kmeans(x, 3, 4, a);
  const auto rb = kmeans(x, 3, 4, b);
  EXPECT_EQ(ra.assignments, rb.assignments);
  EXPECT_EQ(ra.inertia, rb.inertia);
  RngStream rng(1);
  EXPECT_EQ(kind_of([&] { kmeans(x, 0, 1, rng); }), ErrorKind::ConfigInvalid);
  EXPECT_EQ(kind_of([&] { kmeans(x, 51, 1, rng); }), ErrorKind::ConfigInvalid);
  EXPECT_EQ(kind_of([&] { kmeans(x, 2, 0, rng); }), ErrorKind::ConfigInvalid);
}

TEST(Kmeans, DuplicatePointsWithManyClusters) {
  Matrix x(10, 1);
  for (std::size_t i = 5; i < 10; ++i) x(i, 0) = 1.0;
  RngStream rng(11);
  const KmeansResult r = kmeans(x, 4, 3, rng);
  EXPECT_NEAR(r.inertia, 0.0, 1e-12);
  for (int a : r.assignments) EXPECT_LT(a, 4);
}

TEST(ClusteringAccuracy, Examples) {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  EXPECT_EQ(clustering_accuracy(truth, truth), 1.0);
  EXPECT_EQ(clustering_accuracy({2, 2, 0, 0, 1, 1}, truth), 1.0);
  EXPECT_EQ(clustering_accuracy({0, 1, 0, 1}, {0, 0, 1, 1}), 0.5);
  EXPECT_NEAR(clustering_accuracy({0, 0, 0, 0}, {0, 0, 1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(clustering_accuracy({0, 1, 2, 3}, {0, 0, 1, 1}), 0.5, 1e-15);
  EXPECT_EQ(kind_of([] { clustering_accuracy({0, 1}, {0}); }), ErrorKind::LengthMismatch);
}

TEST(ClusteringAccuracy, MatchesExhaustiveSearch) {
  RngStream rng(12);
  for (int t = 0; t < 200; ++t) {
    const auto kp = 1 + rng.uniform_index(6);
    const auto kt = 1 + rng.uniform_index(6);
    const auto n = 5 + rng.uniform_index(40);
    std::vector<int> pred(n), truth(n);
    for (auto& v : pred) v = static_cast<int>(rng.uniform_index(kp));
    for (auto& v : truth) v = static_cast<int>(rng.uniform_index(kt));
    EXPECT_EQ(clustering_accuracy(pred, truth), brute_force_accuracy(pred, truth));
  }
}

TEST(ClusteringAccuracy, InvariantToRenaming) {
  RngStream rng(13);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> pred(60), truth(60);
    for (auto& v : pred) v = static_cast<int>(rng.uniform_index(5));
    for (auto& v : truth) v = static_cast<int>(rng.uniform_index(5));
    const auto perm = rng.permutation(5);
    std::vector<int> renamed(60);
    for (std::size_t i = 0; i < 60; ++i) renamed[i] = 10 + static_cast<int>(perm[static_cast<std::size_t>(pred[i])]);
    EXPECT_EQ(clustering_accuracy(renamed, truth), clustering_accuracy(pred, truth));
  }
}

TEST(Assignment, MatchesBruteForce) {
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
    const Matrix w = random_matrix(n, n, 100 + static_cast<std::uint64_t>(t), -5.0, 5.0);
    const auto match = max_weight_assignment(w);
    double got = 0.0;
    for (std::size_t i = 0; i < n; ++i) got += w(i, match[i]);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -INFINITY;
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += w(i, perm[i]);
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(got, best, 1e-9);
  }
}

TEST(Report, CsvAndJson) {
  ExperimentReport r{"demo", {"method", "d"}, {"acc"}, {}, {{"slope", 4.0}}};
  r.rows.push_back({{"lscae", "3"}, {0.5}, {0.25}, 10});
  EXPECT_EQ(r.to_csv(), "method,d,acc_mean,acc_sd,reps\nlscae,3,0.5,0.25,10\n");
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["rows"][0]["method"], "lscae");
  EXPECT_EQ(j["rows"][0]["acc_mean"], 0.5);
  EXPECT_EQ(j["summary"]["slope"], 4.0);
  EXPECT_EQ(r.mean_of({"lscae", "3"}, "acc"), 0.5);
  EXPECT_EQ(r.find({"cae", "3"}), nullptr);
}

TEST(BreakdownHelpers, SmoothingThresholdSlope) {
  EXPECT_EQ(moving_average3({3, 0, 3, 6}), (std::vector<double>{1.5, 2, 3, 4.5}));
  EXPECT_EQ(first_below({0.9, 0.8, 0.6, 0.9}, 0.7), std::optional<std::size_t>(2));
  EXPECT_FALSE(first_below({0.9, 0.8}, 0.7).has_value());
  std::vector<double> r{4, 6, 8, 10}, d;
  for (double v : r) d.push_back(3.0 * std::pow(v, 4));
  EXPECT_NEAR(loglog_slope(r, d), 4.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({4}, {10})));
}

TEST(BreakdownHelpers, DefaultGridIsIncreasing) {
  const auto g = default_breakdown_grid();
  EXPECT_EQ(g.front(), 0u);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_GE(g.back(), 10000u);
}

TEST(NuisanceBudget, GammaAndDimensions) {
  const double gamma = chi2_gamma(50, 0.05);
  EXPECT_NEAR(gamma, 11.477343285740128, 1e-9);
  EXPECT_EQ(nuisance_budget(6.0, gamma), 0u);
  EXPECT_EQ(nuisance_budget(8.0, gamma), 9u);
  EXPECT_EQ(nuisance_budget(1.0, gamma), 0u);
}

TEST(NearestNeighborPurity, Examples) {
  EXPECT_TRUE(nearest_neighbor_pure(Matrix{{0}, {0.1}, {5}, {5.1}}, {0, 0, 1, 1}));
  EXPECT_FALSE(nearest_neighbor_pure(Matrix{{0}, {0.1}, {5}, {5.1}}, {0, 1, 1, 1}));
}

TEST(SpectralSweep, SingleCountAndTrend) {
  RngStream rng(14);
  const Dataset base = gen_two_moons(200, 0.1, rng);
  const auto one = spectral_sweep(base, {0}, 2, 1);
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_EQ(one.rows[0].sds[0], 0.0);
  EXPECT_GT(one.rows[0].means[2], 0.8);

  const auto sweep = spectral_sweep(base, {0, 20, 40}, 2, 1);
  ASSERT_EQ(sweep.rows.size(), 3u);
  EXPECT_GT(sweep.rows[0].means[0], sweep.rows[1].means[0]);
  EXPECT_GT(sweep.rows[1].means[0], sweep.rows[2].means[0]);
  EXPECT_LT(sweep.rows[0].means[1], sweep.rows[2].means[1]);
  EXPECT_EQ(sweep.to_csv(), spectral_sweep(base, {0, 20, 40}, 2, 1).to_csv());
}

TEST(Breakdown, CleanAndSwampedRegimes) {
  BreakdownConfig cfg;
  cfg.r_values = {4};
  cfg.d_grid = {0, 20000};
  cfg.reps = 2;
  const BreakdownResult res = breakdown_experiment(cfg);
  ASSERT_EQ(res.curves.rows.size(), 2u);
  EXPECT_GT(res.curves.rows[0].means[0], 0.99);
  EXPECT_LT(res.curves.rows[1].means[0], 0.3);
  const auto smooth = moving_average3({res.curves.rows[0].means[0], res.curves.rows[1].means[0]});
  EXPECT_EQ(res.curves.rows[0].means[1], smooth[0]);
  const auto hit = first_below(smooth, cfg.threshold);
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(res.points.rows[0].means[0], static_cast<double>(cfg.d_grid[*hit]));
  cfg.threshold = 1.5;
  EXPECT_EQ(kind_of([&] { breakdown_experiment(cfg); }), ErrorKind::ConfigInvalid);
}

TEST(Ablation, SingleRepIsDeterministic) {
  AblationSpec spec;
  spec.d_values = {3};
  spec.reps = 1;
  spec.methods = {Objective::LsOnly};
  spec.base.epochs = 5;
  spec.base.hidden = {8};
  const auto a = ablation_run(spec);
  EXPECT_EQ(a.to_csv(), ablation_run(spec).to_csv());
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_TRUE(a.rows[0].means[0] == 0.0 || a.rows[0].means[0] == 1.0);
}

// Two informative columns carry the clusters; eight others are noise.
Dataset separable_on_two(std::uint64_t seed) {
  RngStream rng(seed);
  Dataset d{Matrix(200, 10), std::vector<int>(200), {}};
  for (std::size_t i = 0; i < 200; ++i) {
    const int y = i < 100 ? 0 : 1;
    (*d.labels)[i] = y;
    d.x(i, 0) = 4.0 * y + 0.3 * rng.normal();
    d.x(i, 1) = -4.0 * y + 0.3 * rng.normal();
    for (std::size_t j = 2; j < 10; ++j) d.x(i, j) = rng.uniform(-1.0, 1.0);
  }
  return d;
}

TEST(SelectionBenchmark, PerfectInformationAndControls) {
  const Dataset data = separable_on_two(15);
  BenchmarkSpec spec;
  spec.feature_counts = {2};
  spec.methods = {SelectionMethod::ClassicalLs, SelectionMethod::LsCae, SelectionMethod::Random};
  spec.kmeans_runs = 5;
  spec.base.epochs = 20;
  spec.base.hidden = {16, 16};
  const auto rep = selection_benchmark(data, spec);
  EXPECT_GE(rep.mean_of({"laplacian_score", "2"}, "accuracy"), 0.95);
  EXPECT_GE(rep.mean_of({"lscae", "2"}, "accuracy"), 0.5);
  EXPECT_GE(rep.mean_of({"all", "10"}, "accuracy"), 0.5);
  EXPECT_NE(rep.find({"random", "2"}), nullptr);
  EXPECT_NE(rep.find({"all", "10"}), nullptr);
}

TEST(SelectionBenchmark, NeedsLabels) {
  Dataset data = separable_on_two(16);
  data.labels.reset();
  EXPECT_EQ(kind_of([&] { selection_benchmark(data, BenchmarkSpec{}); }), ErrorKind::LabelsMissing);
}

TEST(SelectFeatures, BaselinesHaveRequestedSize) {
  const Dataset data = separable_on_two(17);
  const auto r = select_features(data, SelectionMethod::Random, 4, {}, 3);
  EXPECT_EQ(r.size(), 4u);
  EXPECT_EQ(r, select_features(data, SelectionMethod::Random, 4, {}, 3));
  const auto ls = select_features(data, SelectionMethod::ClassicalLs, 2, {}, 3);
  EXPECT_EQ(std::set<std::size_t>(ls.begin(), ls.end()), (std::set<std::size_t>{0, 1}));
  EXPECT_EQ(kind_of([&] { select_features(data, SelectionMethod::Random, 11, {}, 3); }),
            ErrorKind::ConfigInvalid);
}

TEST(KmeansAccuracy, PerfectSyntheticScoresOne) {
  const Dataset data = separable_on_two(18);
  RngStream rng(1);
  const std::vector<std::size_t> cols{0, 1};
  const auto s = kmeans_accuracy(data.x.select_columns(cols), *data.labels, 2, 10, rng);
  EXPECT_EQ(s.mean, 1.0);
  EXPECT_EQ(s.sd, 0.0);
}

}  // namespace
}  // namespace lscae
