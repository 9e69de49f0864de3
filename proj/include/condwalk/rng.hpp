#pragma once

#include <cstdint>
#include <random>

#include "condwalk/types.hpp"

namespace condwalk {

/// Wrapper around a 64-bit Mersenne engine with the distribution objects the
/// library needs. Streams are cheap to construct; each worker or trajectory
/// owns its own, derived deterministically from (seed, index).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Substream for task `index`: mixes (seed, index) through splitmix64 so
  /// that neighboring indices give statistically independent streams.
  static RngStream substream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return RngStream(z);
  }

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(engine_);
  }
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }

  Vector normal_vector(int dim) {
    Vector z(dim);
    for (int i = 0; i < dim; ++i) z(i) = normal();
    return z;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace condwalk
