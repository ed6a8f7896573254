#include "lscae/concrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lscae/error.hpp"
#include "lscae/kernels.hpp"

namespace lscae {

ConcreteLayer ConcreteLayer::initialize(std::size_t k, std::size_t d, RngStream& stream,
                                        double init_scale) {
  if (k == 0 || k > d) fail(ErrorKind::ConfigInvalid, "concrete layer needs 1 <= k <= d");
  ConcreteLayer layer{Matrix(k, d)};
  for (double& v : layer.logits.values()) v = stream.uniform(-init_scale, init_scale);
  return layer;
}

void AnnealSchedule::validate() const {
  if (!(tau_end > 0.0) || !(tau_start >= tau_end) || total_epochs == 0)
    fail(ErrorKind::ConfigInvalid, "schedule needs tau_start >= tau_end > 0 and epochs >= 1");
}

double temperature_at(const AnnealSchedule& sched, std::size_t epoch) {
  sched.validate();
  if (epoch >= sched.total_epochs)
    fail(ErrorKind::EpochOutOfRange, "epoch " + std::to_string(epoch) + " >= " +
                                         std::to_string(sched.total_epochs));
  if (sched.total_epochs == 1) return sched.tau_start;
  if (epoch + 1 == sched.total_epochs) return sched.tau_end;
  const double frac = static_cast<double>(epoch) / static_cast<double>(sched.total_epochs - 1);
  return sched.tau_start + (sched.tau_end - sched.tau_start) * frac;
}

ConcreteOutput concrete_forward_with_noise(const ConcreteLayer& layer, const Matrix& x, double tau,
                                           const Matrix& gumbels) {
  if (!(tau > 0.0)) fail(ErrorKind::ConfigInvalid, "temperature must be positive");
  if (x.cols() != layer.d())
    fail(ErrorKind::ShapeMismatch, "input has " + std::to_string(x.cols()) +
                                       " columns, layer expects " + std::to_string(layer.d()));
  require_same_shape(layer.logits, gumbels, "gumbel noise");
  require_finite(layer.logits, "concrete logits");
  require_finite(x, "concrete input");

  const std::size_t k = layer.k();
  const std::size_t d = layer.d();
  ConcreteOutput out{Matrix(), {Matrix(k, d), gumbels}};
  Matrix& z = out.weights.z;
  for (std::size_t i = 0; i < k; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d; ++j) {
      z(i, j) = (layer.logits(i, j) + gumbels(i, j)) / tau;
      peak = std::max(peak, z(i, j));
    }
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      z(i, j) = std::exp(z(i, j) - peak);
      total += z(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) z(i, j) /= total;
  }
  out.c = kernels::matmul_abt(x, z);
  return out;
}

ConcreteOutput concrete_forward(const ConcreteLayer& layer, const Matrix& x, double tau,
                                RngStream& stream, bool stochastic) {
  Matrix g(layer.k(), layer.d());
  if (stochastic)
    for (double& v : g.values()) v = stream.gumbel();
  return concrete_forward_with_noise(layer, x, tau, g);
}

Matrix softmax_backward(const SelectionWeights& weights, double tau, const Matrix& dz) {
  require_same_shape(weights.z, dz, "softmax_backward");
  const Matrix& z = weights.z;
  Matrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) inner += z(i, j) * dz(i, j);
    for (std::size_t j = 0; j < z.cols(); ++j) out(i, j) = z(i, j) * (dz(i, j) - inner) / tau;
  }
  return out;
}

Matrix concrete_backward(const ConcreteLayer& layer, const Matrix& x,
                         const SelectionWeights& weights, double tau, const Matrix& dc) {
  if (x.cols() != layer.d()) fail(ErrorKind::ShapeMismatch, "input width != layer d");
  if (dc.rows() != x.rows() || dc.cols() != layer.k())
    fail(ErrorKind::ShapeMismatch, "dC must be m x k");
  require_same_shape(layer.logits, weights.z, "selection weights");
  // dL/dz_i = x^T dC_{:,i}, stacked as rows: dC^T x.
  return softmax_backward(weights, tau, kernels::matmul_atb(dc, x));
}

RedundancyPenalty redundancy_penalty(const SelectionWeights& weights, double m_scale) {
  const Matrix& z = weights.z;
  RedundancyPenalty out;
  out.dz = Matrix(z.rows(), z.cols());
  out.max_column_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < z.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i) s += z(i, j);
    if (s > out.max_column_sum) {
      out.max_column_sum = s;
      out.argmax_column = j;
    }
  }
  if (out.max_column_sum > 1.0) {
    out.value = m_scale * (out.max_column_sum - 1.0);
    for (std::size_t i = 0; i < z.rows(); ++i) out.dz(i, out.argmax_column) = m_scale;
  }
  return out;
}

Selection selected_indices(const ConcreteLayer& layer) {
  Selection out;
  for (std::size_t i = 0; i < layer.k(); ++i) {
    const auto row = layer.logits.row(i);
    out.indices.push_back(
        static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  const std::set<std::size_t> unique(out.indices.begin(), out.indices.end());
  out.duplicates = out.indices.size() - unique.size();
  return out;
}

}  // namespace lscae
