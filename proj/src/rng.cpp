#include "lscae/rng.hpp"

#include <cmath>
#include <numbers>

#include "lscae/error.hpp"

namespace lscae {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), key_(mix64(seed + kGamma)) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key) {}

RngStream RngStream::split(std::uint64_t tag) const {
  return RngStream(seed_, mix64(key_ ^ mix64(tag * kGamma + 0x2545F4914F6CDD1DULL)));
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform01() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) fail(ErrorKind::ConfigInvalid, "uniform_index requires n > 0");
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double RngStream::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool RngStream::bernoulli(double p) { return uniform01() < p; }

double RngStream::gumbel() { return gumbel_from_uniform(uniform01()); }

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = uniform_index(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

double gumbel_from_uniform(double u) { return -std::log(-std::log(u)); }

std::vector<double> gumbel_draws(RngStream& stream, std::size_t count) {
  if (count == 0) fail(ErrorKind::ConfigInvalid, "gumbel_draws requires count >= 1");
  std::vector<double> g(count);
  for (double& v : g) v = stream.gumbel();
  return g;
}

}  // namespace lscae
