#include "ddpred/rng.hpp"

#include <cmath>
#include <numbers>

namespace ddpred::rng {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer: full-avalanche bijection on 64-bit words.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  // Chain one full mix per component, tagged with its position so that
  // {a, b} and {b, a} (and prefixes) land on unrelated seeds. Each step
  // xors two bijections of distinct inputs, so nearby paths do not
  // collide the way additive combines do.
  std::uint64_t h = mix(master + kGolden);
  std::uint64_t pos = 1;
  for (std::uint64_t component : path) {
    h = mix(h ^ mix(component + pos * kGolden));
    ++pos;
  }
  return h;
}

double Stream::gaussian() {
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ddpred::rng
