#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lscae/csv.hpp"
#include "lscae/datasets.hpp"
#include "lscae/error.hpp"
#include "lscae/eval.hpp"
#include "lscae/graph.hpp"
#include "lscae/rng.hpp"
#include "lscae/train.hpp"

namespace lscae::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::LabelsMissing:
    case ErrorKind::LengthMismatch:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::EpochOutOfRange:
      return kExitUsage;
    case ErrorKind::ParseError:
    case ErrorKind::IoError:
      return kExitIo;
    default:
      return kExitNumeric;
  }
}

struct Globals {
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  std::string format = "csv";
};

fs::path output_path(const Globals& g, const std::string& file) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create output directory " + g.out_dir);
  return fs::path(g.out_dir) / file;
}

fs::path emit_report(const Globals& g, const ExperimentReport& rep, const std::string& stem) {
  const bool json = g.format == "json";
  const fs::path path = output_path(g, stem + (json ? ".json" : ".csv"));
  write_text(path, json ? rep.to_json() : rep.to_csv());
  return path;
}

// "a:b:step" (inclusive) or "a,b,c".
std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v < 0) fail(ErrorKind::ConfigInvalid, "bad count '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) fail(ErrorKind::ConfigInvalid, "range must be start:stop:step");
    const std::size_t a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (step == 0 || b < a) fail(ErrorKind::ConfigInvalid, "empty range " + text);
    for (std::size_t v = a; v <= b; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  if (out.empty()) fail(ErrorKind::ConfigInvalid, "empty list");
  return out;
}

std::vector<std::string> header_cells(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  return cells;
}

// Uses `label` when given; otherwise a header column named "label" if there is one.
Dataset read_dataset(const std::string& path, const std::string& label) {
  if (!label.empty()) return load_csv(path, label);
  const auto cells = header_cells(path);
  if (std::find(cells.begin(), cells.end(), "label") != cells.end())
    return load_csv(path, std::string("label"));
  return load_csv(path);
}

KernelConfig kernel_of(double sigma) {
  return sigma > 0.0 ? KernelConfig::fixed(sigma) : KernelConfig::heuristic();
}

// ---- synth ----

struct SynthOptions {
  std::string out;
  std::size_t n = 1000;
  double noise = 0.1;
  std::size_t nuisance = 0;
  std::size_t per_cluster = 50;
  double r = 1.0;
  double noise_sd = 0.70710678118654752440;
  std::size_t d = 3;
  std::size_t ablation_n = 1200;
  std::size_t images = 1797;
  double p_mask = 0.2;
  bool clean = false;
};

int cmd_synth(const Globals& g, const std::string& generator, const SynthOptions& o) {
  RngStream rng(g.seed);
  Dataset data;
  ordered_json params;
  if (generator == "two-moons") {
    data = gen_two_moons(o.n, o.noise, rng);
    if (o.nuisance > 0) data = add_nuisance_uniform(data, o.nuisance, rng);
    params = {{"n", o.n}, {"noise", o.noise}, {"nuisance", o.nuisance}};
  } else if (generator == "case-study") {
    CaseStudyConfig cfg;
    cfg.n_per_cluster = o.per_cluster;
    cfg.r = o.r;
    cfg.d_nuisance = o.nuisance;
    cfg.noise_sd = o.noise_sd;
    data = gen_case_study(cfg, rng);
    params = {{"n_per_cluster", o.per_cluster}, {"r", o.r}, {"nuisance", o.nuisance},
              {"noise_sd", o.noise_sd}};
  } else if (generator == "ablation-moons") {
    AblationConfig cfg;
    cfg.d = o.d;
    cfg.n = o.ablation_n;
    data = gen_ablation_moons(cfg, rng);
    params = {{"d", o.d}, {"n", o.ablation_n}};
  } else {
    DigitsConfig cfg;
    cfg.n = o.images;
    RngStream glyphs = rng.split(1);
    data = gen_digits(cfg, glyphs);
    if (!o.clean) {
      RngStream noise = rng.split(2);
      data.x = corrupt_images(data.x, o.p_mask, noise);
    }
    params = {{"n", o.images}, {"p_mask", o.clean ? 0.0 : o.p_mask}};
  }
  const std::string stem = o.out.empty() ? generator : o.out;
  const fs::path csv = output_path(g, stem + ".csv");
  save_csv(data, csv);

  ordered_json meta;
  meta["generator"] = generator;
  meta["seed"] = g.seed;
  meta["params"] = params;
  meta["n"] = data.n();
  meta["d"] = data.d();
  meta["classes"] = data.n_classes();
  meta["data"] = csv.filename().string();
  meta["label_column"] = "label";
  meta["feature_names"] = data.feature_names;
  write_text(output_path(g, stem + ".json"), meta.dump(2) + "\n");
  std::cout << "wrote " << csv.string() << " (" << data.n() << " x " << data.d() << ")\n";
  return kExitOk;
}

// ---- select ----

struct SelectOptions {
  std::string input;
  std::string label;
  LscaeConfig cfg;
  std::string objective = "lscae";
  std::string ls_scaling;
  std::string optimizer;
  double sigma = 0.0;
  bool raw = false;
  bool record_time = false;
  bool save_decoder = false;
};

int cmd_select(const Globals& g, SelectOptions o) {
  const Dataset data = read_dataset(o.input, o.label);
  LscaeConfig cfg = o.cfg;
  cfg.seed = g.seed;
  cfg.objective = parse_objective(o.objective);
  if (!o.ls_scaling.empty()) cfg.ls_scaling = parse_ls_scaling(o.ls_scaling);
  if (!o.optimizer.empty()) cfg.concrete_optimizer = parse_concrete_optimizer(o.optimizer);
  cfg.kernel = kernel_of(o.sigma);
  cfg.z_transform = !o.raw;
  const FitResult r = fit(data, cfg);

  write_text(output_path(g, "selected.json"), fit_result_json(r, o.record_time));
  write_training_log(r, output_path(g, "train_log.csv"));
  write_logits_csv(r.final_logits, output_path(g, "logits.csv"));
  if (o.save_decoder && r.decoder) save_decoder(*r.decoder, output_path(g, "decoder.bin"));

  std::cout << "selected";
  for (std::size_t j : r.selected) {
    std::cout << ' ' << j;
    if (!data.feature_names.empty()) std::cout << ':' << data.feature_names[j];
  }
  std::cout << "\nduplicates " << r.duplicates << '\n';
  return kExitOk;
}

// ---- eval ----

struct EvalOptions {
  std::string input;
  std::string label;
  std::string features;
  std::size_t clusters = 0;
  std::size_t restarts = 20;
};

std::vector<std::size_t> read_selection(const std::string& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("selected") || !j["selected"].is_array())
    fail(ErrorKind::ParseError, path + ": no 'selected' array");
  std::vector<std::size_t> cols;
  for (const auto& v : j["selected"]) {
    if (!v.is_number_unsigned()) fail(ErrorKind::ParseError, path + ": non-integer index");
    const auto c = v.get<std::size_t>();
    if (c >= d) fail(ErrorKind::ConfigInvalid, "selected index " + std::to_string(c) + " >= d");
    cols.push_back(c);
  }
  if (cols.empty()) fail(ErrorKind::ConfigInvalid, "empty selection");
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

int cmd_eval(const Globals& g, const EvalOptions& o) {
  const Dataset data = read_dataset(o.input, o.label);
  if (!data.labels) fail(ErrorKind::LabelsMissing, "eval needs a label column");
  std::vector<std::size_t> cols;
  if (o.features.empty()) {
    for (std::size_t j = 0; j < data.d(); ++j) cols.push_back(j);
  } else {
    cols = read_selection(o.features, data.d());
  }
  const std::size_t clusters =
      o.clusters > 0 ? o.clusters : static_cast<std::size_t>(data.n_classes());
  RngStream rng(g.seed);
  const AccuracyStats s =
      kmeans_accuracy(data.x.select_columns(cols), *data.labels, clusters, o.restarts, rng);

  ExperimentReport rep;
  rep.name = "eval";
  rep.key_names = {"features", "clusters"};
  rep.metric_names = {"accuracy"};
  rep.rows.push_back({{std::to_string(cols.size()), std::to_string(clusters)}, {s.mean}, {s.sd}, s.runs});
  emit_report(g, rep, "eval");

  char line[128];
  std::snprintf(line, sizeof line, "accuracy %.4f ± %.4f (%zu runs, %zu features)\n", s.mean,
                s.sd, s.runs, cols.size());
  std::cout << line;
  return kExitOk;
}

// ---- diagnose ----

struct DiagnoseOptions {
  std::string input;
  std::string label;
  std::string nuisance = "0:60:10";
  std::size_t n = 600;
  double noise = 0.1;
  std::size_t reps = 5;
  std::vector<double> r_values{4, 6, 8};
  double threshold = 0.7;
  std::size_t per_cluster = 50;
  std::string grid;
  std::size_t contrib_nuisance = 8;
  double sigma = 0.0;
};

int cmd_spectra(const Globals& g, const DiagnoseOptions& o) {
  Dataset base;
  if (!o.input.empty()) {
    base = read_dataset(o.input, o.label);
  } else {
    RngStream rng(g.seed);
    base = gen_two_moons(o.n, o.noise, rng);
  }
  const auto rep = spectral_sweep(base, parse_counts(o.nuisance), o.reps, g.seed, kernel_of(o.sigma));
  std::cout << "wrote " << emit_report(g, rep, "spectra").string() << '\n';
  return kExitOk;
}

int cmd_breakdown(const Globals& g, const DiagnoseOptions& o) {
  BreakdownConfig cfg;
  cfg.r_values = o.r_values;
  cfg.threshold = o.threshold;
  cfg.reps = o.reps;
  cfg.n_per_cluster = o.per_cluster;
  cfg.seed = g.seed;
  if (!o.grid.empty()) cfg.d_grid = parse_counts(o.grid);
  const BreakdownResult res = breakdown_experiment(cfg);
  emit_report(g, res.curves, "breakdown_curves");
  std::cout << "wrote " << emit_report(g, res.points, "breakdown").string() << '\n';
  for (const auto& row : res.points.rows)
    std::cout << "r=" << row.keys[0] << " d*=" << format_double(row.means[0]) << '\n';
  std::cout << "loglog_slope " << format_double(res.loglog_slope) << '\n';
  return kExitOk;
}

int cmd_contrib(const Globals& g, const DiagnoseOptions& o) {
  Dataset data;
  if (!o.input.empty()) {
    data = read_dataset(o.input, o.label);
  } else {
    RngStream rng(g.seed);
    data = add_nuisance_uniform(gen_two_moons(o.n, o.noise, rng), o.contrib_nuisance, rng);
  }
  const std::vector<double> c = feature_contribution(data.x, kernel_of(o.sigma));
  ExperimentReport rep;
  rep.name = "contrib";
  rep.key_names = {"feature", "name"};
  rep.metric_names = {"contribution"};
  for (std::size_t j = 0; j < c.size(); ++j) {
    const std::string name = data.feature_names.empty() ? "f" + std::to_string(j) : data.feature_names[j];
    rep.rows.push_back({{std::to_string(j), name}, {c[j]}, {0.0}, 1});
  }
  std::cout << "wrote " << emit_report(g, rep, "contrib").string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Unsupervised feature selection with a concrete layer and a Laplacian-score objective",
               "lscae"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  app.add_option("--seed", g.seed, "Root random seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset (CSV + metadata JSON)");
  synth->require_subcommand(1);
  SynthOptions so;
  synth->add_option("--out", so.out, "Output file stem (default: generator name)");
  auto* moons = synth->add_subcommand("two-moons", "Two interleaving moons plus uniform nuisance columns");
  moons->add_option("--n", so.n, "Samples")->capture_default_str();
  moons->add_option("--noise", so.noise, "Gaussian noise sd on the moons")->capture_default_str();
  moons->add_option("--nuisance", so.nuisance, "Uniform nuisance columns")->capture_default_str();
  auto* cs = synth->add_subcommand("case-study", "Two point clusters at 0 and r with Gaussian noise");
  cs->add_option("--n-per-cluster", so.per_cluster)->capture_default_str();
  cs->add_option("--r", so.r, "Cluster separation")->capture_default_str();
  cs->add_option("--nuisance", so.nuisance, "Nuisance dimensions")->capture_default_str();
  cs->add_option("--noise-sd", so.noise_sd)->capture_default_str();
  auto* abl = synth->add_subcommand("ablation-moons",
                                    "Moons, a noisy copy and two correlated Gaussian nuisance blocks");
  abl->add_option("--d", so.d, "Nuisance block width")->capture_default_str();
  abl->add_option("--n", so.ablation_n, "Samples")->capture_default_str();
  auto* imgs = synth->add_subcommand("noisy-images", "8x8 digit-style images with a shared noise pattern");
  imgs->add_option("--n", so.images, "Images")->capture_default_str();
  imgs->add_option("--p-mask", so.p_mask, "Bernoulli mask probability [published]")->capture_default_str();
  imgs->add_flag("--clean", so.clean, "Skip the corruption");

  // select
  auto* sel = app.add_subcommand("select", "Train and write selected.json, train_log.csv, logits.csv");
  SelectOptions se;
  sel->add_option("--input", se.input, "Input CSV")->required();
  sel->add_option("--label-column", se.label, "Label column to drop (default: 'label' if present)");
  sel->add_option("--k", se.cfg.k, "Features to select")->capture_default_str();
  sel->add_option("--epochs", se.cfg.epochs, "Training epochs [published]")->capture_default_str();
  sel->add_option("--lr-concrete", se.cfg.lr_concrete, "Concrete-layer learning rate [published]")
      ->capture_default_str();
  sel->add_option("--lr-decoder", se.cfg.lr_decoder, "Decoder learning rate [published]")
      ->capture_default_str();
  sel->add_option("--tau-start", se.cfg.tau_start, "Initial temperature [tool]")->capture_default_str();
  sel->add_option("--tau-end", se.cfg.tau_end, "Final temperature [tool]")->capture_default_str();
  sel->add_option("--objective", se.objective, "lscae, cae (no Laplacian term) or ls (no reconstruction)")
      ->check(CLI::IsMember({"lscae", "cae", "ls"}))
      ->capture_default_str();
  sel->add_option("--batch-size", se.cfg.batch_size, "Mini-batch size, 0 = min(n, 256) [tool]")
      ->capture_default_str();
  sel->add_option("--penalty", se.cfg.m_penalty, "Duplicate-selection penalty scale [tool]")
      ->capture_default_str();
  sel->add_option("--hidden", se.cfg.hidden, "Decoder hidden widths [published]")
      ->delimiter(',')
      ->capture_default_str();
  sel->add_option("--ls-scaling", se.ls_scaling,
                  "Laplacian trace on raw codes or on centered unit-norm codes (raw|normalized) [tool: " +
                      to_string(LscaeConfig{}.ls_scaling) + "]");
  sel->add_option("--concrete-optimizer", se.optimizer,
                  "adam or sgd for the selection logits [tool: " +
                      to_string(LscaeConfig{}.concrete_optimizer) + "]");
  sel->add_option("--sigma", se.sigma, "Fixed kernel bandwidth, 0 = nearest-neighbor heuristic [published]")
      ->capture_default_str();
  sel->add_flag("--raw", se.raw, "Skip the per-column z-transform");
  sel->add_flag("--record-time", se.record_time, "Add wall time to selected.json");
  sel->add_flag("--save-decoder", se.save_decoder, "Write the trained decoder to decoder.bin");

  // eval
  auto* ev = app.add_subcommand("eval", "k-means clustering accuracy on selected columns");
  EvalOptions eo;
  ev->add_option("--input", eo.input, "Labelled input CSV")->required();
  ev->add_option("--label-column", eo.label, "Label column (default: 'label')");
  ev->add_option("--features", eo.features, "selected.json from `select` (default: all columns)");
  ev->add_option("--clusters", eo.clusters, "Clusters, 0 = number of classes")->capture_default_str();
  ev->add_option("--restarts", eo.restarts, "Independent k-means runs averaged [published]")
      ->capture_default_str();

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "Spectral diagnostics (plot-ready reports)");
  dg->require_subcommand(1);
  DiagnoseOptions dopt;
  auto* sp = dg->add_subcommand("spectra", "lambda2, Fiedler value and |corr(psi2, y)| vs nuisance count");
  sp->add_option("--input", dopt.input, "Labelled base dataset (default: two moons)");
  sp->add_option("--label-column", dopt.label);
  sp->add_option("--nuisance", dopt.nuisance, "Counts as start:stop:step or a,b,c")->capture_default_str();
  sp->add_option("--n", dopt.n, "Two-moons samples")->capture_default_str();
  sp->add_option("--noise", dopt.noise, "Two-moons noise sd")->capture_default_str();
  sp->add_option("--reps", dopt.reps)->capture_default_str();
  sp->add_option("--sigma", dopt.sigma, "Fixed bandwidth, 0 = heuristic")->capture_default_str();
  auto* bd = dg->add_subcommand("breakdown", "Nuisance dimension where the eigenvector correlation drops");
  bd->add_option("--r", dopt.r_values, "Cluster separations")->delimiter(',')->capture_default_str();
  bd->add_option("--threshold", dopt.threshold, "Correlation threshold [published]")->capture_default_str();
  bd->add_option("--reps", dopt.reps)->capture_default_str();
  bd->add_option("--n-per-cluster", dopt.per_cluster)->capture_default_str();
  bd->add_option("--grid", dopt.grid, "Nuisance grid (default: 0 then sqrt(2) steps to 40000)");
  auto* ct = dg->add_subcommand("contrib", "Per-feature f^T L_diff f");
  ct->add_option("--input", dopt.input, "Dataset (default: two moons plus uniform nuisance)");
  ct->add_option("--label-column", dopt.label);
  ct->add_option("--n", dopt.n, "Two-moons samples")->capture_default_str();
  ct->add_option("--noise", dopt.noise, "Two-moons noise sd")->capture_default_str();
  ct->add_option("--nuisance", dopt.contrib_nuisance, "Uniform nuisance columns")->capture_default_str();
  ct->add_option("--sigma", dopt.sigma, "Fixed bandwidth, 0 = heuristic")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      for (auto* sub : synth->get_subcommands()) return cmd_synth(g, sub->get_name(), so);
    }
    if (sel->parsed()) return cmd_select(g, se);
    if (ev->parsed()) return cmd_eval(g, eo);
    if (sp->parsed()) return cmd_spectra(g, dopt);
    if (bd->parsed()) return cmd_breakdown(g, dopt);
    if (ct->parsed()) return cmd_contrib(g, dopt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  std::cerr << app.help();
  return kExitUsage;
}

}  // namespace lscae::cli
