#pragma once

#include <cstddef>
#include <vector>

#include "lscae/matrix.hpp"
#include "lscae/rng.hpp"

namespace lscae {

/// k selection units over d inputs. Row i of `logits` holds the unnormalized
/// log-probabilities of unit i; softmax(logits_i) recovers its categorical
/// distribution.
struct ConcreteLayer {
  Matrix logits;

  std::size_t k() const noexcept { return logits.rows(); }
  std::size_t d() const noexcept { return logits.cols(); }

  /// Logits iid uniform(-init_scale, init_scale). Requires 1 <= k <= d.
  static ConcreteLayer initialize(std::size_t k, std::size_t d, RngStream& stream,
                                  double init_scale = 0.01);
};

/// Linear temperature decay from tau_start (epoch 0) to tau_end (last epoch).
struct AnnealSchedule {
  double tau_start = 10.0;
  double tau_end = 0.1;
  std::size_t total_epochs = 300;

  void validate() const;
};

/// Throws EpochOutOfRange when epoch >= total_epochs. A single-epoch schedule
/// runs at tau_start.
double temperature_at(const AnnealSchedule& sched, std::size_t epoch);

struct SelectionWeights {
  Matrix z;        // k x d, rows on the simplex
  Matrix gumbels;  // k x d noise used for this forward pass (zeros when deterministic)
};

struct ConcreteOutput {
  Matrix c;  // m x k, c = x z^T
  SelectionWeights weights;
};

/// Row i of z = softmax((logits_i + g_i) / tau). With `stochastic` the Gumbel
/// draws g come from `stream` (one k x d draw shared by all rows of x);
/// otherwise g = 0 and `stream` is untouched.
ConcreteOutput concrete_forward(const ConcreteLayer& layer, const Matrix& x, double tau,
                                RngStream& stream, bool stochastic);
/// Same as above with caller-provided noise (k x d).
ConcreteOutput concrete_forward_with_noise(const ConcreteLayer& layer, const Matrix& x, double tau,
                                           const Matrix& gumbels);

/// Pulls a gradient with respect to z back through the row softmaxes:
/// dlogits_i = (1/tau) (diag(z_i) - z_i z_i^T) dz_i.
Matrix softmax_backward(const SelectionWeights& weights, double tau, const Matrix& dz);

/// Gradient of a loss with respect to the logits given dL/dC (m x k).
Matrix concrete_backward(const ConcreteLayer& layer, const Matrix& x,
                         const SelectionWeights& weights, double tau, const Matrix& dc);

struct RedundancyPenalty {
  double value = 0.0;
  double max_column_sum = 0.0;
  std::size_t argmax_column = 0;
  Matrix dz;  // subgradient, k x d
};

/// M * max(0, m - 1) with m the largest column sum of z (ties go to the lowest
/// column). The subgradient is M on the argmax column when m > 1.
RedundancyPenalty redundancy_penalty(const SelectionWeights& weights, double m_scale);

struct Selection {
  std::vector<std::size_t> indices;  // argmax per unit, lowest index on ties
  std::size_t duplicates = 0;        // k minus the number of distinct indices
};

Selection selected_indices(const ConcreteLayer& layer);

}  // namespace lscae
