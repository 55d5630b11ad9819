#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ddpred::rng {

/// Derives an independent stream seed from a master seed and a path of
/// identifiers (e.g. {system_id, level, realization}). Uses splitmix64
/// mixing, so nearby paths give uncorrelated seeds and the mapping is
/// identical on every platform.
std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> path);

/// Deterministic random stream. Wraps std::mt19937_64 (whose output
/// sequence is pinned by the standard) and maps raw 64-bit draws to
/// floating-point values itself, so results do not depend on the
/// standard library's distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer on {lo, ..., hi} inclusive.
  int uniform_int(int lo, int hi) {
    const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % range);
  }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double gaussian();

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ddpred::rng
