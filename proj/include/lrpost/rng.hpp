#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "lrpost/linalg.hpp"

namespace lrpost {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so samples can be produced in any order or in
/// parallel with identical results.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ ^ mix(counter + 0x9e3779b97f4a7c15ULL));
  }

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on counters 2c and 2c + 1.
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Draw `index` of a standard normal vector of length `dim`.
  Vec normal_vector(std::uint64_t index, Index dim) const {
    Vec out(dim);
    const std::uint64_t base = index * static_cast<std::uint64_t>(dim);
    for (Index j = 0; j < dim; ++j) out(j) = normal(base + static_cast<std::uint64_t>(j));
    return out;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

}  // namespace lrpost
