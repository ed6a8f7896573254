#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lscae/concrete.hpp"
#include "lscae/datasets.hpp"
#include "lscae/decoder.hpp"
#include "lscae/graph.hpp"
#include "lscae/matrix.hpp"

namespace lscae {

enum class Objective {
  LsCae,    // reconstruction and Laplacian-score terms
  CaeOnly,  // reconstruction term only
  LsOnly,   // Laplacian-score term only, no decoder
};

/// How the concrete-layer codes enter the Laplacian trace. Normalized centers
/// each code column and scales it to unit norm first; Raw uses C as is.
enum class LsScaling { Raw, Normalized };

enum class ConcreteOptimizer { Adam, Sgd };

std::string to_string(Objective o);
std::string to_string(LsScaling s);
std::string to_string(ConcreteOptimizer o);
LsScaling parse_ls_scaling(const std::string& name);
ConcreteOptimizer parse_concrete_optimizer(const std::string& name);
/// Accepts "lscae", "cae", "ls". Throws ConfigInvalid otherwise.
Objective parse_objective(const std::string& name);

struct LscaeConfig {
  std::size_t k = 2;
  std::size_t epochs = 300;
  std::size_t batch_size = 0;  // 0 means min(n, 256)
  double lr_concrete = 1.0;
  double lr_decoder = 0.01;
  double tau_start = 10.0;
  double tau_end = 0.1;
  double m_penalty = 100.0;
  KernelConfig kernel = KernelConfig::heuristic();
  std::uint64_t seed = 42;
  Objective objective = Objective::LsCae;
  bool z_transform = true;
  std::vector<std::size_t> hidden = {128, 128};
  LsScaling ls_scaling = LsScaling::Raw;
  ConcreteOptimizer concrete_optimizer = ConcreteOptimizer::Sgd;  // decoder always uses Adam

  AnnealSchedule schedule() const { return {tau_start, tau_end, epochs}; }
  std::size_t effective_batch(std::size_t n) const;
  /// Checks everything except k <= d, which needs the data.
  void validate() const;
};

/// Raw terms below this count as zero: no value and no gradient.
inline constexpr double kRawTermFloor = 1e-12;

struct ReconstructionTerm {
  double raw = 0.0;         // mean squared error
  double normalized = 0.0;  // raw / sg(raw), 1 when active
  bool active = false;
  Matrix d_xhat;            // gradient of the normalized term
};

ReconstructionTerm reconstruction_term(const Matrix& x, const Matrix& xhat);

struct LaplacianTerm {
  double raw = 0.0;         // trace of the (scaled) codes against L
  double normalized = 0.0;  // raw / sg(raw), 1 when active
  bool active = false;
  Matrix laplacian;         // the detached L used for this batch
  Matrix dc;                // gradient of -normalized with respect to C
};

/// Builds L = D^{-1} K from the batch codes and treats it as a constant.
/// Throws DegenerateData when every row of C is identical or m < 3.
LaplacianTerm laplacian_score_term(const Matrix& c, const KernelConfig& cfg,
                                   LsScaling scaling = LsScaling::Raw);
/// Same with a caller-provided L.
LaplacianTerm laplacian_score_term(const Matrix& c, const Matrix& laplacian,
                                   LsScaling scaling = LsScaling::Raw);

struct LossTerms {
  std::optional<ReconstructionTerm> recon;
  std::optional<LaplacianTerm> ls;
  RedundancyPenalty penalty;
  double value = 0.0;  // recon_norm - ls_norm + penalty
};

/// Assembles the objective from already computed pieces. `xhat` is ignored
/// when the objective has no reconstruction term.
LossTerms lscae_loss(const Matrix& x, const Matrix* xhat, const Matrix& c,
                     const SelectionWeights& weights, const LscaeConfig& cfg);

/// Everything needed for one optimizer step on a single batch.
struct StepGradients {
  LossTerms terms;
  Matrix dlogits;                     // total
  Matrix dlogits_recon;               // decoder path only
  Matrix dlogits_ls;                  // Laplacian path only
  std::optional<DecoderGradients> decoder;
};

StepGradients batch_gradients(const ConcreteLayer& layer, const MlpDecoder* decoder,
                              const Matrix& x, const Matrix& gumbels, double tau,
                              const LscaeConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double tau = 0.0;
  double recon_raw = 0.0;  // batch mean, nan without a reconstruction term
  double ls_raw = 0.0;     // batch mean, nan without a Laplacian term
  double penalty = 0.0;    // batch mean
  double total = 0.0;      // batch mean of the objective value
  double max_norm_deviation = 0.0;    // max |term_norm - 1| over active terms
  double max_total_minus_penalty = 0.0;
  double grad_ratio_min = 0.0;  // ||dlogits_recon|| / ||dlogits_ls||, nan if undefined
  double grad_ratio_max = 0.0;
  std::size_t duplicates = 0;   // of the argmax selection after the epoch
};

struct FitResult {
  std::vector<std::size_t> selected;
  std::size_t duplicates = 0;
  std::vector<EpochRecord> trace;
  Matrix final_logits;
  std::optional<MlpDecoder> decoder;
  LscaeConfig config;
  std::size_t n = 0;
  std::size_t d = 0;
  double wall_seconds = 0.0;
};

/// Minibatch training of the concrete layer (and decoder unless the objective
/// is LsOnly) with two Adam groups. Returns the argmax selection.
FitResult fit(const Dataset& data, const LscaeConfig& cfg);

/// Columns: epoch, tau, recon_raw, ls_raw, penalty, total, duplicates.
void write_training_log(const FitResult& r, const std::filesystem::path& path);
/// Selection, config echo and, when `with_time`, the wall time.
std::string fit_result_json(const FitResult& r, bool with_time);
void write_logits_csv(const Matrix& logits, const std::filesystem::path& path);

}  // namespace lscae
