#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace comnet {

// SplitMix64 (Steele, Lea & Flood). Every seeded quantity in the library
// (masks, phantoms, weight init, shuffles) is drawn from this generator so
// that other implementations can reproduce the exact same streams:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// uniform() maps the top 53 bits onto [0, 1).
class SplitMix64
{
public:
  explicit SplitMix64(std::uint64_t seed)
    : state_(seed)
  {
  }

  std::uint64_t next()
  {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one value per call (the second is discarded to keep the
  // stream position independent of call history).
  double normal()
  {
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    double const u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

private:
  std::uint64_t state_;
};

// Independent sub-stream for a (seed, purpose) pair.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
  SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  return g.next();
}

} // namespace comnet
