#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lscae {

/// Counter-based random stream. Output i is a fixed 64-bit mixing function of
/// (key, i), so sequences depend only on the seed and are identical on every
/// platform. `split` derives statistically independent child streams.
///
/// A stream is single-owner; give each thread its own split.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 42);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Child stream keyed by (this stream's key, tag). Does not advance this stream.
  RngStream split(std::uint64_t tag) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  bool bernoulli(double p);
  double gumbel();

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  RngStream(std::uint64_t seed, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// `count` iid Gumbel(0,1) draws, g = -log(-log(u)).
std::vector<double> gumbel_draws(RngStream& stream, std::size_t count);

/// Inverse-CDF transform used by `gumbel_draws`; exposed for closed-form checks.
double gumbel_from_uniform(double u);

}  // namespace lscae
