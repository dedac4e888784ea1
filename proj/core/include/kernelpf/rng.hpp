#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kernelpf/errors.hpp"

namespace kernelpf {

/// SplitMix64 stream with splittable per-replicate derivation. The samplers
/// are hand-rolled (inversion / product methods) so that seeded runs are
/// byte-identical across platforms; standard-library distributions are
/// implementation-defined and would break that contract.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream for one replicate: the master seed and the stream
  /// index are pushed through the SplitMix64 finalizer twice.
  static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(mix64(mix64(master_seed + 0x9E3779B97F4A7C15ULL * (index + 1)) ^
                     0xBF58476D1CE4E5B9ULL));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// uniform in [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// uniform in (0,1]
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double mean = 1.0) { return -mean * std::log(uniform_pos()); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Knuth product method; large means split recursively (exact in law).
  std::uint64_t poisson(double mean) {
    if (mean < 0.0) throw PreconditionError("invalid-argument", "poisson mean < 0");
    if (mean == 0.0) return 0;
    if (mean > 30.0) return poisson(mean / 2.0) + poisson(mean / 2.0);
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double product = 1.0;
    do {
      ++k;
      product *= uniform_pos();
    } while (product > limit);
    return k - 1;
  }

  /// geometric on {0,1,2,...} with success probability p (mean (1-p)/p)
  std::uint64_t geometric0(double p) {
    if (!(p > 0.0) || p > 1.0)
      throw PreconditionError("invalid-argument", "geometric needs p in (0,1]");
    if (p == 1.0) return 0;
    return static_cast<std::uint64_t>(std::floor(std::log(uniform_pos()) / std::log1p(-p)));
  }

  /// index drawn proportionally to the (non-negative) weights
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0))
      throw PreconditionError("invalid-argument", "categorical needs positive total weight");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

private:
  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace kernelpf
