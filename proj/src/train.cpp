#include "lscae/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "lscae/csv.hpp"
#include "lscae/error.hpp"
#include "lscae/kernels.hpp"

namespace lscae {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool uses_recon(Objective o) { return o != Objective::LsOnly; }
bool uses_ls(Objective o) { return o != Objective::CaeOnly; }

bool rows_identical(const Matrix& c) {
  for (std::size_t i = 1; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      if (c(i, j) != c(0, j)) return false;
  return true;
}

}  // namespace

std::string to_string(Objective o) {
  switch (o) {
    case Objective::LsCae: return "lscae";
    case Objective::CaeOnly: return "cae";
    case Objective::LsOnly: return "ls";
  }
  return "?";
}

std::string to_string(LsScaling s) { return s == LsScaling::Raw ? "raw" : "normalized"; }

std::string to_string(ConcreteOptimizer o) { return o == ConcreteOptimizer::Adam ? "adam" : "sgd"; }

LsScaling parse_ls_scaling(const std::string& name) {
  if (name == "raw") return LsScaling::Raw;
  if (name == "normalized") return LsScaling::Normalized;
  fail(ErrorKind::ConfigInvalid, "unknown Laplacian scaling '" + name + "' (expected raw or normalized)");
}

ConcreteOptimizer parse_concrete_optimizer(const std::string& name) {
  if (name == "adam") return ConcreteOptimizer::Adam;
  if (name == "sgd") return ConcreteOptimizer::Sgd;
  fail(ErrorKind::ConfigInvalid, "unknown optimizer '" + name + "' (expected adam or sgd)");
}

Objective parse_objective(const std::string& name) {
  if (name == "lscae") return Objective::LsCae;
  if (name == "cae") return Objective::CaeOnly;
  if (name == "ls") return Objective::LsOnly;
  fail(ErrorKind::ConfigInvalid, "unknown objective '" + name + "' (expected lscae, cae or ls)");
}

std::size_t LscaeConfig::effective_batch(std::size_t n) const {
  return std::min(n, batch_size == 0 ? std::size_t{256} : batch_size);
}

void LscaeConfig::validate() const {
  if (k == 0) fail(ErrorKind::ConfigInvalid, "k must be at least 1");
  if (epochs == 0) fail(ErrorKind::ConfigInvalid, "epochs must be at least 1");
  if (!(lr_concrete >= 0.0) || !(lr_decoder >= 0.0) || !std::isfinite(lr_concrete) ||
      !std::isfinite(lr_decoder))
    fail(ErrorKind::ConfigInvalid, "learning rates must be finite and non-negative");
  if (!(m_penalty > 0.0)) fail(ErrorKind::ConfigInvalid, "penalty scale must be positive");
  for (std::size_t h : hidden)
    if (h == 0) fail(ErrorKind::ConfigInvalid, "hidden widths must be positive");
  schedule().validate();
}

ReconstructionTerm reconstruction_term(const Matrix& x, const Matrix& xhat) {
  require_same_shape(x, xhat, "reconstruction");
  ReconstructionTerm t;
  t.d_xhat = Matrix(x.rows(), x.cols());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = xhat.data()[i] - x.data()[i];
    s += r * r;
  }
  t.raw = s / static_cast<double>(x.size());
  if (!(t.raw >= kRawTermFloor)) return t;
  t.active = true;
  const double sg = t.raw;
  t.normalized = t.raw / sg;
  const double scale = 2.0 / (static_cast<double>(x.size()) * sg);
  for (std::size_t i = 0; i < x.size(); ++i)
    t.d_xhat.data()[i] = scale * (xhat.data()[i] - x.data()[i]);
  return t;
}

LaplacianTerm laplacian_score_term(const Matrix& c, const KernelConfig& cfg, LsScaling scaling) {
  if (c.rows() < 3) fail(ErrorKind::DegenerateData, "Laplacian term needs at least 3 rows");
  require_finite(c, "concrete codes");
  if (rows_identical(c)) fail(ErrorKind::DegenerateData, "all code rows coincide");
  return laplacian_score_term(c, diffusion_laplacian(gaussian_kernel(c, cfg)), scaling);
}

LaplacianTerm laplacian_score_term(const Matrix& c, const Matrix& laplacian, LsScaling scaling) {
  if (laplacian.rows() != c.rows() || !laplacian.is_square())
    fail(ErrorKind::ShapeMismatch, "Laplacian does not match the batch");
  const std::size_t m = c.rows();
  const std::size_t k = c.cols();

  // u = centered, unit-norm columns (or c itself); constant columns drop out.
  Matrix u = c;
  std::vector<double> norms(k, 1.0);
  if (scaling == LsScaling::Normalized) {
    for (std::size_t j = 0; j < k; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += c(i, j);
      mean /= static_cast<double>(m);
      double ss = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        u(i, j) = c(i, j) - mean;
        ss += u(i, j) * u(i, j);
      }
      norms[j] = std::sqrt(ss);
      for (std::size_t i = 0; i < m; ++i) u(i, j) = norms[j] > 0.0 ? u(i, j) / norms[j] : 0.0;
    }
  }

  LaplacianTerm t;
  t.laplacian = laplacian;
  const Matrix lu = kernels::matmul(laplacian, u);
  double tr = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) tr += u.data()[i] * lu.data()[i];
  t.raw = tr;
  t.dc = Matrix(m, k);
  if (!(t.raw >= kRawTermFloor)) return t;
  t.active = true;
  const double sg = t.raw;
  t.normalized = t.raw / sg;
  const Matrix ltu = kernels::matmul_atb(laplacian, u);
  for (std::size_t i = 0; i < u.size(); ++i) t.dc.data()[i] = -(lu.data()[i] + ltu.data()[i]) / sg;
  if (scaling == LsScaling::Normalized) {
    // Pull back through u = (c - mean) / ||c - mean|| column by column.
    for (std::size_t j = 0; j < k; ++j) {
      if (!(norms[j] > 0.0)) {
        for (std::size_t i = 0; i < m; ++i) t.dc(i, j) = 0.0;
        continue;
      }
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += u(i, j) * t.dc(i, j);
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        t.dc(i, j) = (t.dc(i, j) - u(i, j) * dot) / norms[j];
        mean += t.dc(i, j);
      }
      mean /= static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) t.dc(i, j) -= mean;
    }
  }
  return t;
}

LossTerms lscae_loss(const Matrix& x, const Matrix* xhat, const Matrix& c,
                     const SelectionWeights& weights, const LscaeConfig& cfg) {
  LossTerms out;
  if (uses_recon(cfg.objective)) {
    if (xhat == nullptr) fail(ErrorKind::ConfigInvalid, "reconstruction term needs a decoder output");
    out.recon = reconstruction_term(x, *xhat);
  }
  if (uses_ls(cfg.objective) && c.rows() >= 3)
    out.ls = laplacian_score_term(c, cfg.kernel, cfg.ls_scaling);
  out.penalty = redundancy_penalty(weights, cfg.m_penalty);
  const double recon = out.recon ? out.recon->normalized : 0.0;
  const double ls = out.ls ? out.ls->normalized : 0.0;
  out.value = recon - ls + out.penalty.value;
  return out;
}

StepGradients batch_gradients(const ConcreteLayer& layer, const MlpDecoder* decoder,
                              const Matrix& x, const Matrix& gumbels, double tau,
                              const LscaeConfig& cfg) {
  const ConcreteOutput conc = concrete_forward_with_noise(layer, x, tau, gumbels);
  std::optional<DecoderOutput> dec_out;
  if (uses_recon(cfg.objective)) {
    if (decoder == nullptr) fail(ErrorKind::ConfigInvalid, "objective needs a decoder");
    dec_out = decoder_forward(*decoder, conc.c);
  }
  StepGradients g;
  g.terms = lscae_loss(x, dec_out ? &dec_out->xhat : nullptr, conc.c, conc.weights, cfg);

  g.dlogits_recon = Matrix(layer.k(), layer.d());
  g.dlogits_ls = Matrix(layer.k(), layer.d());
  if (dec_out) {
    g.decoder = decoder_backward(*decoder, dec_out->cache, g.terms.recon->d_xhat);
    g.dlogits_recon = concrete_backward(layer, x, conc.weights, tau, g.decoder->dc);
  }
  if (g.terms.ls) g.dlogits_ls = concrete_backward(layer, x, conc.weights, tau, g.terms.ls->dc);
  g.dlogits = g.dlogits_recon + g.dlogits_ls;
  if (g.terms.penalty.value > 0.0)
    g.dlogits = g.dlogits + softmax_backward(conc.weights, tau, g.terms.penalty.dz);
  return g;
}

FitResult fit(const Dataset& data, const LscaeConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  data.validate();
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  if (cfg.k > d)
    fail(ErrorKind::ConfigInvalid,
         "k=" + std::to_string(cfg.k) + " exceeds the " + std::to_string(d) + " input features");
  if (n < 3) fail(ErrorKind::DegenerateData, "need at least 3 samples");
  const Matrix x = cfg.z_transform ? z_transform(data.x).x : data.x;
  require_finite(x, "training data");

  const RngStream root(cfg.seed);
  RngStream init_concrete = root.split(1);
  RngStream init_decoder = root.split(2);
  RngStream shuffle = root.split(3);
  RngStream noise = root.split(4);

  ConcreteLayer layer = ConcreteLayer::initialize(cfg.k, d, init_concrete);
  std::optional<MlpDecoder> decoder;
  if (uses_recon(cfg.objective))
    decoder = MlpDecoder::initialize(cfg.k, d, init_decoder, cfg.hidden);
  AdamState adam_concrete;
  AdamState adam_decoder;

  const AnnealSchedule sched = cfg.schedule();
  const std::size_t batch = cfg.effective_batch(n);
  FitResult result;
  result.config = cfg;
  result.n = n;
  result.d = d;
  result.trace.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double tau = temperature_at(sched, epoch);
    const auto order = shuffle.permutation(n);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.tau = tau;
    rec.grad_ratio_min = kNan;
    rec.grad_ratio_max = kNan;
    double recon_sum = 0.0, ls_sum = 0.0, pen_sum = 0.0, total_sum = 0.0;
    std::size_t batches = 0, recon_count = 0, ls_count = 0;

    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Matrix xb = x.select_rows(rows);
      const auto draws = gumbel_draws(noise, cfg.k * d);
      const Matrix gumbels(cfg.k, d, draws);

      StepGradients g = batch_gradients(layer, decoder ? &*decoder : nullptr, xb, gumbels, tau, cfg);
      const LossTerms& t = g.terms;

      ++batches;
      pen_sum += t.penalty.value;
      total_sum += t.value;
      if (t.recon) {
        recon_sum += t.recon->raw;
        ++recon_count;
        if (t.recon->active)
          rec.max_norm_deviation = std::max(rec.max_norm_deviation, std::abs(t.recon->normalized - 1.0));
      }
      if (t.ls) {
        ls_sum += t.ls->raw;
        ++ls_count;
        if (t.ls->active)
          rec.max_norm_deviation = std::max(rec.max_norm_deviation, std::abs(t.ls->normalized - 1.0));
      }
      if ((!t.recon || t.recon->active) && (!t.ls || t.ls->active)) {
        const double terms = (t.recon ? 1.0 : 0.0) - (t.ls ? 1.0 : 0.0);
        rec.max_total_minus_penalty =
            std::max(rec.max_total_minus_penalty, std::abs(t.value - terms - t.penalty.value));
      }
      const double ratio = frobenius_norm(g.dlogits_recon) / frobenius_norm(g.dlogits_ls);
      if (t.recon && t.ls && std::isfinite(ratio) && ratio > 0.0) {
        rec.grad_ratio_min = std::isnan(rec.grad_ratio_min) ? ratio : std::min(rec.grad_ratio_min, ratio);
        rec.grad_ratio_max = std::isnan(rec.grad_ratio_max) ? ratio : std::max(rec.grad_ratio_max, ratio);
      }

      const std::vector<std::span<double>> lp{layer.logits.values()};
      const std::vector<std::span<const double>> lg{g.dlogits.values()};
      if (cfg.concrete_optimizer == ConcreteOptimizer::Sgd) {
        for (std::size_t i = 0; i < layer.logits.size(); ++i)
          layer.logits.data()[i] -= cfg.lr_concrete * g.dlogits.data()[i];
      } else {
        adam_step(lp, lg, adam_concrete, cfg.lr_concrete);
      }
      if (decoder) adam_step(parameter_views(*decoder), gradient_views(*g.decoder), adam_decoder, cfg.lr_decoder);
    }
    require_finite(layer.logits, "concrete logits");

    rec.recon_raw = recon_count ? recon_sum / static_cast<double>(recon_count) : kNan;
    rec.ls_raw = ls_count ? ls_sum / static_cast<double>(ls_count) : kNan;
    rec.penalty = pen_sum / static_cast<double>(batches);
    rec.total = total_sum / static_cast<double>(batches);
    rec.duplicates = selected_indices(layer).duplicates;
    result.trace.push_back(rec);
  }

  const Selection sel = selected_indices(layer);
  result.selected = sel.indices;
  result.duplicates = sel.duplicates;
  result.final_logits = layer.logits;
  result.decoder = std::move(decoder);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void write_training_log(const FitResult& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << "epoch,tau,recon_raw,ls_raw,penalty,total,duplicates\n";
  for (const auto& e : r.trace)
    out << e.epoch << ',' << format_double(e.tau) << ',' << format_double(e.recon_raw) << ','
        << format_double(e.ls_raw) << ',' << format_double(e.penalty) << ','
        << format_double(e.total) << ',' << e.duplicates << '\n';
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

std::string fit_result_json(const FitResult& r, bool with_time) {
  const LscaeConfig& c = r.config;
  nlohmann::ordered_json j;
  j["selected"] = r.selected;
  j["duplicates"] = r.duplicates;
  j["n"] = r.n;
  j["d"] = r.d;
  j["config"] = {{"k", c.k},
                 {"epochs", c.epochs},
                 {"batch_size", c.effective_batch(r.n)},
                 {"lr_concrete", c.lr_concrete},
                 {"lr_decoder", c.lr_decoder},
                 {"tau_start", c.tau_start},
                 {"tau_end", c.tau_end},
                 {"penalty", c.m_penalty},
                 {"sigma", c.kernel.mode == KernelConfig::Mode::Heuristic
                               ? nlohmann::ordered_json("heuristic")
                               : nlohmann::ordered_json(c.kernel.sigma)},
                 {"objective", to_string(c.objective)},
                 {"ls_scaling", to_string(c.ls_scaling)},
                 {"concrete_optimizer", to_string(c.concrete_optimizer)},
                 {"z_transform", c.z_transform},
                 {"hidden", c.hidden},
                 {"seed", c.seed}};
  if (!r.trace.empty()) {
    const auto& last = r.trace.back();
    auto num = [](double v) {
      return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    };
    j["final_epoch"] = {{"tau", last.tau},
                        {"recon_raw", num(last.recon_raw)},
                        {"ls_raw", num(last.ls_raw)},
                        {"penalty", last.penalty}};
  }
  if (with_time) j["wall_seconds"] = r.wall_seconds;
  return j.dump(2) + "\n";
}

void write_logits_csv(const Matrix& logits, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      if (j) out << ',';
      out << format_double(logits(i, j));
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace lscae
