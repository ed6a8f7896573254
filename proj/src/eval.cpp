#include "lscae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lscae/csv.hpp"
#include "lscae/error.hpp"
#include "lscae/kernels.hpp"
#include "lscae/stats.hpp"

namespace lscae {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxLloyd = 300;

double sq_dist_to(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

Matrix kmeanspp_seed(const Matrix& x, std::size_t k, RngStream& rng) {
  const std::size_t n = x.rows();
  Matrix centers(k, x.cols());
  std::vector<double> best(n, kInf);
  std::size_t pick = rng.uniform_index(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(best[i], sq_dist_to(x.row(i), centers.row(c)));
      total += best[i];
    }
    if (c + 1 == k) break;
    if (!(total > 0.0)) {
      pick = rng.uniform_index(n);
      continue;
    }
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += best[i];
      if (acc >= target && best[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centers;
}

struct LloydRun {
  std::vector<int> assign;
  Matrix centers;
  double inertia = kInf;
  std::size_t iterations = 0;
};

LloydRun lloyd(const Matrix& x, Matrix centers, std::size_t restart, const InertiaObserver& observer) {
  const std::size_t n = x.rows();
  const std::size_t k = centers.rows();
  const std::size_t d = x.cols();
  LloydRun run;
  run.assign.assign(n, -1);
  std::vector<double> dist(n, 0.0);
  for (std::size_t it = 0; it < kMaxLloyd; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int arg = 0;
      double best = kInf;
      for (std::size_t c = 0; c < k; ++c) {
        const double v = sq_dist_to(x.row(i), centers.row(c));
        if (v < best) {
          best = v;
          arg = static_cast<int>(c);
        }
      }
      dist[i] = best;
      if (run.assign[i] != arg) {
        run.assign[i] = arg;
        changed = true;
      }
    }
    if (!changed) break;

    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(run.assign[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums(c, j) += x(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed at the point farthest from its assigned centroid.
        const auto far = static_cast<std::size_t>(
            std::max_element(dist.begin(), dist.end()) - dist.begin());
        std::copy(x.row(far).begin(), x.row(far).end(), centers.row(c).begin());
        dist[far] = 0.0;
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
    run.iterations = it + 1;
    if (observer) {
      double inertia = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        inertia += sq_dist_to(x.row(i), centers.row(static_cast<std::size_t>(run.assign[i])));
      observer(restart, it, inertia);
    }
  }
  run.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    run.inertia += sq_dist_to(x.row(i), centers.row(static_cast<std::size_t>(run.assign[i])));
  run.centers = std::move(centers);
  return run;
}

std::string key_of(double v) { return format_double(v); }

// Nearest-neighbor bandwidth, or the largest pairwise distance when every
// point has an exact duplicate (no nuisance dimensions).
KernelConfig case_study_kernel(const Matrix& x) {
  const Matrix d2 = kernels::pairwise_sq_dist(x);
  try {
    return KernelConfig::fixed(sigma_heuristic_from_sq_dist(d2));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateData) throw;
    return KernelConfig::fixed(std::sqrt(max_abs(d2)));
  }
}

double sample_sd_or_zero(const std::vector<double>& v) {
  return v.size() < 2 ? 0.0 : stats::sample_sd(v);
}

}  // namespace

KmeansResult kmeans(const Matrix& x, std::size_t k, std::size_t restarts, RngStream& stream,
                    const InertiaObserver& observer) {
  if (k == 0 || k > x.rows())
    fail(ErrorKind::ConfigInvalid, "k-means needs 1 <= k <= n (k=" + std::to_string(k) + ")");
  if (restarts == 0) fail(ErrorKind::ConfigInvalid, "k-means needs at least one restart");
  require_finite(x, "k-means input");
  LloydRun best;
  for (std::size_t r = 0; r < restarts; ++r) {
    LloydRun run = lloyd(x, kmeanspp_seed(x, k, stream), r, observer);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return {std::move(best.assign), std::move(best.centers), best.inertia, best.iterations};
}

std::vector<std::size_t> max_weight_assignment(const Matrix& weights) {
  if (!weights.is_square()) fail(ErrorKind::ShapeMismatch, "assignment needs a square matrix");
  const std::size_t n = weights.rows();
  // Shortest augmenting path Hungarian method on cost = -weight, 1-based.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double clustering_accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    fail(ErrorKind::LengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                        " labels, truth has " + std::to_string(truth.size()));
  if (pred.empty()) fail(ErrorKind::LengthMismatch, "no labels to compare");
  std::vector<int> pl(pred), tl(truth);
  for (auto* v : {&pl, &tl}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  const std::size_t size = std::max(pl.size(), tl.size());
  Matrix confusion(size, size);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto a = std::lower_bound(pl.begin(), pl.end(), pred[i]) - pl.begin();
    const auto b = std::lower_bound(tl.begin(), tl.end(), truth[i]) - tl.begin();
    confusion(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) += 1.0;
  }
  const auto match = max_weight_assignment(confusion);
  double agree = 0.0;
  for (std::size_t i = 0; i < size; ++i) agree += confusion(i, match[i]);
  return agree / static_cast<double>(pred.size());
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  for (const auto& k : key_names) out << k << ',';
  for (const auto& m : metric_names) out << m << "_mean," << m << "_sd,";
  out << "reps\n";
  for (const Row& r : rows) {
    for (const auto& k : r.keys) out << k << ',';
    for (std::size_t m = 0; m < metric_names.size(); ++m)
      out << format_double(r.means[m]) << ',' << format_double(r.sds[m]) << ',';
    out << r.reps << '\n';
  }
  return out.str();
}

std::string ExperimentReport::to_json() const {
  auto num = [](double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["name"] = name;
  j["keys"] = key_names;
  j["metrics"] = metric_names;
  j["rows"] = nlohmann::ordered_json::array();
  for (const Row& r : rows) {
    nlohmann::ordered_json row;
    for (std::size_t k = 0; k < key_names.size(); ++k) row[key_names[k]] = r.keys[k];
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      row[metric_names[m] + "_mean"] = num(r.means[m]);
      row[metric_names[m] + "_sd"] = num(r.sds[m]);
    }
    row["reps"] = r.reps;
    j["rows"].push_back(row);
  }
  if (!summary.empty()) {
    nlohmann::ordered_json s;
    for (const auto& [k, v] : summary) s[k] = num(v);
    j["summary"] = s;
  }
  return j.dump(2) + "\n";
}

const ExperimentReport::Row* ExperimentReport::find(const std::vector<std::string>& keys) const {
  for (const Row& r : rows)
    if (r.keys == keys) return &r;
  return nullptr;
}

double ExperimentReport::mean_of(const std::vector<std::string>& keys, const std::string& metric) const {
  const Row* r = find(keys);
  const auto it = std::find(metric_names.begin(), metric_names.end(), metric);
  if (r == nullptr || it == metric_names.end())
    fail(ErrorKind::ConfigInvalid, "report has no entry for metric " + metric);
  return r->means[static_cast<std::size_t>(it - metric_names.begin())];
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

ExperimentReport spectral_sweep(const Dataset& base, const std::vector<std::size_t>& nuisance_counts,
                                std::size_t reps, std::uint64_t seed, const KernelConfig& kernel) {
  if (reps == 0) fail(ErrorKind::ConfigInvalid, "reps must be at least 1");
  if (!base.labels) fail(ErrorKind::LabelsMissing, "spectral sweep needs labels");
  std::vector<double> y(base.labels->begin(), base.labels->end());
  ExperimentReport rep{"spectra", {"nuisance"}, {"lambda2", "fiedler", "abs_corr"}, {}, {}};
  const RngStream root(seed);
  for (std::size_t count : nuisance_counts) {
    std::vector<std::vector<double>> metrics(3);
    for (std::size_t r = 0; r < reps; ++r) {
      RngStream stream = root.split(count).split(r);
      const Dataset data = add_nuisance_uniform(base, count, stream);
      const SpectralSummary s = spectral_summary(data.x, kernel);
      metrics[0].push_back(s.lambda2_diff);
      metrics[1].push_back(s.fiedler);
      metrics[2].push_back(std::abs(stats::pearson(s.psi2, y)));
    }
    ExperimentReport::Row row{{std::to_string(count)}, {}, {}, reps};
    for (const auto& m : metrics) {
      row.means.push_back(stats::mean(m));
      row.sds.push_back(sample_sd_or_zero(m));
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::vector<std::size_t> default_breakdown_grid() {
  std::vector<std::size_t> grid{0};
  for (double v = 1.0; v <= 40000.0; v *= std::sqrt(2.0)) {
    const auto d = static_cast<std::size_t>(std::llround(v));
    if (d != grid.back()) grid.push_back(d);
  }
  return grid;
}

std::vector<double> moving_average3(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(v.size() - 1, i + 1);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += v[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::optional<std::size_t> first_below(const std::vector<double>& v, double threshold) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < threshold) return i;
  return std::nullopt;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorKind::LengthMismatch, "slope inputs differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return kNan;
  const double mx = stats::mean(lx);
  const double my = stats::mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : kNan;
}

BreakdownResult breakdown_experiment(const BreakdownConfig& cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
    fail(ErrorKind::ConfigInvalid, "threshold must lie in (0,1)");
  if (cfg.reps == 0) fail(ErrorKind::ConfigInvalid, "reps must be at least 1");
  const std::vector<std::size_t> grid = cfg.d_grid.empty() ? default_breakdown_grid() : cfg.d_grid;
  BreakdownResult out;
  out.curves = {"breakdown_curves", {"r", "d"}, {"abs_corr", "smoothed"}, {}, {}};
  out.points = {"breakdown", {"r"}, {"d_star"}, {}, {}};
  const RngStream root(cfg.seed);
  std::vector<double> rs, dstars;
  for (std::size_t ri = 0; ri < cfg.r_values.size(); ++ri) {
    const double r = cfg.r_values[ri];
    std::vector<double> means, sds;
    for (std::size_t di = 0; di < grid.size(); ++di) {
      std::vector<double> corr;
      for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        RngStream stream = root.split(ri).split(di).split(rep);
        const Dataset data = gen_case_study({cfg.n_per_cluster, r, grid[di], cfg.noise_sd}, stream);
        std::vector<double> y(data.labels->size());
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = (*data.labels)[i] == 0 ? -1.0 : 1.0;
        const SpectralSummary s = spectral_summary(data.x, case_study_kernel(data.x));
        corr.push_back(std::abs(stats::pearson(s.psi2, y)));
      }
      means.push_back(stats::mean(corr));
      sds.push_back(sample_sd_or_zero(corr));
    }
    const auto smooth = moving_average3(means);
    for (std::size_t di = 0; di < grid.size(); ++di)
      out.curves.rows.push_back(
          {{key_of(r), std::to_string(grid[di])}, {means[di], smooth[di]}, {sds[di], 0.0}, cfg.reps});
    const auto hit = first_below(smooth, cfg.threshold);
    const double dstar = hit ? static_cast<double>(grid[*hit]) : kNan;
    out.points.rows.push_back({{key_of(r)}, {dstar}, {0.0}, cfg.reps});
    rs.push_back(r);
    dstars.push_back(dstar);
  }
  out.loglog_slope = loglog_slope(rs, dstars);
  out.points.summary.push_back({"loglog_slope", out.loglog_slope});
  return out;
}

double chi2_gamma(std::size_t n_per_cluster, double eps) {
  if (n_per_cluster == 0 || !(eps > 0.0 && eps < 1.0))
    fail(ErrorKind::ConfigInvalid, "gamma needs n >= 1 and eps in (0,1)");
  const double n = static_cast<double>(n_per_cluster);
  const double pairs = 2.0 * n * n - n;
  // 1 - (1-eps)^(1/pairs) computed without cancellation.
  const double tail = -std::expm1(std::log1p(-eps) / pairs);
  return -std::log(tail);
}

std::size_t nuisance_budget(double r, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::ConfigInvalid, "gamma must be positive");
  const double num = r * r - 2.0 * gamma;
  if (num <= 0.0) return 0;
  const double root = num / (4.0 * std::sqrt(gamma));
  return static_cast<std::size_t>(std::floor(root * root));
}

bool nearest_neighbor_pure(const Matrix& x, const std::vector<int>& labels) {
  if (labels.size() != x.rows()) fail(ErrorKind::LengthMismatch, "labels do not match rows");
  const Matrix d2 = kernels::pairwise_sq_dist(x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = kInf;
    std::size_t arg = i;
    for (std::size_t j = 0; j < x.rows(); ++j)
      if (j != i && d2(i, j) < best) {
        best = d2(i, j);
        arg = j;
      }
    if (arg != i && labels[arg] != labels[i]) return false;
  }
  return true;
}

ExperimentReport ablation_run(const AblationSpec& spec) {
  if (spec.reps == 0) fail(ErrorKind::ConfigInvalid, "reps must be at least 1");
  ExperimentReport rep{"ablation", {"method", "d"}, {"success"}, {}, {}};
  const RngStream root(spec.seed);
  for (Objective method : spec.methods) {
    for (std::size_t d : spec.d_values) {
      std::vector<double> hits;
      for (std::size_t r = 0; r < spec.reps; ++r) {
        RngStream data_stream = root.split(d).split(r);
        const Dataset data = gen_ablation_moons(d, data_stream);
        LscaeConfig cfg = spec.base;
        cfg.k = 2;
        cfg.objective = method;
        cfg.seed = root.split(d).split(r).split(1).next_u64();
        const FitResult fr = fit(data, cfg);
        const bool ok = std::all_of(fr.selected.begin(), fr.selected.end(),
                                    [](std::size_t j) { return j < 4; });
        hits.push_back(ok ? 1.0 : 0.0);
      }
      rep.rows.push_back({{to_string(method), std::to_string(d)},
                          {stats::mean(hits)},
                          {sample_sd_or_zero(hits)},
                          spec.reps});
    }
  }
  return rep;
}

AccuracyStats kmeans_accuracy(const Matrix& x, const std::vector<int>& labels, std::size_t clusters,
                              std::size_t runs, RngStream& stream) {
  if (runs == 0) fail(ErrorKind::ConfigInvalid, "runs must be at least 1");
  if (labels.size() != x.rows()) fail(ErrorKind::LengthMismatch, "labels do not match rows");
  std::vector<double> acc;
  for (std::size_t r = 0; r < runs; ++r) {
    RngStream s = stream.split(r);
    acc.push_back(clustering_accuracy(kmeans(x, clusters, 1, s).assignments, labels));
  }
  stream.next_u64();
  return {stats::mean(acc), sample_sd_or_zero(acc), runs};
}

std::string to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::LsCae: return "lscae";
    case SelectionMethod::CaeOnly: return "cae";
    case SelectionMethod::LsOnly: return "ls";
    case SelectionMethod::ClassicalLs: return "laplacian_score";
    case SelectionMethod::Random: return "random";
  }
  return "?";
}

std::vector<std::size_t> select_features(const Dataset& data, SelectionMethod method,
                                         std::size_t count, const LscaeConfig& base,
                                         std::uint64_t seed) {
  if (count == 0 || count > data.d())
    fail(ErrorKind::ConfigInvalid, "feature count must lie in [1, d]");
  switch (method) {
    case SelectionMethod::Random: {
      RngStream rng(seed);
      auto perm = rng.permutation(data.d());
      perm.resize(count);
      return perm;
    }
    case SelectionMethod::ClassicalLs: {
      auto order = laplacian_score_rank(data.x, base.kernel).order;
      order.resize(count);
      return order;
    }
    default: {
      LscaeConfig cfg = base;
      cfg.k = count;
      cfg.seed = seed;
      cfg.objective = method == SelectionMethod::LsCae   ? Objective::LsCae
                      : method == SelectionMethod::CaeOnly ? Objective::CaeOnly
                                                           : Objective::LsOnly;
      return fit(data, cfg).selected;
    }
  }
}

ExperimentReport selection_benchmark(const Dataset& data, const BenchmarkSpec& spec) {
  if (!data.labels) fail(ErrorKind::LabelsMissing, "selection benchmark needs labels");
  if (spec.reps == 0 || spec.kmeans_runs == 0)
    fail(ErrorKind::ConfigInvalid, "reps and k-means runs must be at least 1");
  const auto& labels = *data.labels;
  const auto clusters = static_cast<std::size_t>(data.n_classes());
  ExperimentReport rep{"selection", {"method", "count"}, {"accuracy"}, {}, {}};
  const RngStream root(spec.seed);
  for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
    for (std::size_t count : spec.feature_counts) {
      std::vector<double> acc;
      for (std::size_t r = 0; r < spec.reps; ++r) {
        RngStream stream = root.split(mi + 1).split(count).split(r);
        const auto cols = select_features(data, spec.methods[mi], count, spec.base, stream.next_u64());
        RngStream km = stream.split(7);
        acc.push_back(kmeans_accuracy(data.x.select_columns(cols), labels, clusters,
                                      spec.kmeans_runs, km)
                          .mean);
      }
      rep.rows.push_back({{to_string(spec.methods[mi]), std::to_string(count)},
                          {stats::mean(acc)},
                          {sample_sd_or_zero(acc)},
                          spec.reps});
    }
  }
  if (spec.include_all_features) {
    RngStream km = root.split(0);
    const AccuracyStats all = kmeans_accuracy(data.x, labels, clusters, spec.kmeans_runs, km);
    rep.rows.push_back({{"all", std::to_string(data.d())}, {all.mean}, {all.sd}, spec.kmeans_runs});
  }
  return rep;
}

}  // namespace lscae
