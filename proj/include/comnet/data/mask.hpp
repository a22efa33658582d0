#pragma once

#include "../core/array.hpp"
#include "../core/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace comnet {

// Binary [ky, kx] sampling pattern. The acs_height x acs_width block
// centered at (ky/2, kx/2) is always fully sampled.
struct SamplingMask
{
  ByteImage pattern;
  double acceleration = 1.0;
  Index acs_height = 0;
  Index acs_width = 0;
  std::uint64_t seed = 0;

  Index rows() const { return pattern.rows(); }
  Index cols() const { return pattern.cols(); }
  Index sampled() const { return static_cast<Index>((pattern != 0).count()); }
  double fraction() const { return static_cast<double>(sampled()) / static_cast<double>(pattern.size()); }
  bool operator==(SamplingMask const &o) const
  {
    return acceleration == o.acceleration && acs_height == o.acs_height && acs_width == o.acs_width &&
           seed == o.seed && pattern.rows() == o.pattern.rows() && pattern.cols() == o.pattern.cols() &&
           (pattern == o.pattern).all();
  }
};

// First row/column of the centered ACS block, using the floor(n/2) center.
inline Index acs_origin(Index n, Index acs) { return n / 2 - acs / 2; }

inline SamplingMask full_mask(Index ny, Index nx)
{
  SamplingMask m;
  m.pattern = ByteImage::Ones(ny, nx);
  m.acceleration = 1.0;
  m.acs_height = ny;
  m.acs_width = nx;
  return m;
}

// Pointwise variable-density random mask. Outside the ACS block, points are
// drawn without replacement with probability proportional to a centered 2-D
// Gaussian (sigma = extent / 6) until floor(ny*nx/R) points are set. The
// weighted draw uses exponential keys log(u)/w (Efraimidis-Spirakis), which
// is equivalent to sequential proportional sampling and is a pure function
// of the seed.
inline SamplingMask generate_mask(Index ny, Index nx, double accel, Index acs_h, Index acs_w, std::uint64_t seed)
{
  if (ny < 1 || nx < 1) {
    throw InvalidArgument("generate_mask: grid must be nonempty");
  }
  if (!(accel >= 1.0) || !std::isfinite(accel)) {
    throw InvalidArgument("generate_mask: acceleration must be a finite value >= 1");
  }
  if (acs_h < 1 || acs_w < 1 || acs_h > ny || acs_w > nx) {
    throw InvalidArgument("generate_mask: ACS block " + shape_string(acs_h, acs_w) + " does not fit in grid " +
                          shape_string(ny, nx));
  }
  Index const total = static_cast<Index>(std::floor(static_cast<double>(ny * nx) / accel));
  Index const acs_count = acs_h * acs_w;
  if (total < acs_count) {
    throw InvalidArgument("generate_mask: acceleration R=" + std::to_string(accel) + " allows only " +
                          std::to_string(total) + " samples but the ACS block alone needs " +
                          std::to_string(acs_count) + "; lower R or shrink the ACS");
  }

  SamplingMask m;
  m.pattern = ByteImage::Zero(ny, nx);
  m.acceleration = accel;
  m.acs_height = acs_h;
  m.acs_width = acs_w;
  m.seed = seed;
  Index const y0 = acs_origin(ny, acs_h);
  Index const x0 = acs_origin(nx, acs_w);
  m.pattern.block(y0, x0, acs_h, acs_w).setOnes();

  double const sy = static_cast<double>(ny) / 6.0;
  double const sx = static_cast<double>(nx) / 6.0;
  struct Candidate
  {
    double key;
    Index pos;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(ny * nx - acs_count));
  SplitMix64 rng(seed);
  for (Index y = 0; y < ny; ++y) {
    for (Index x = 0; x < nx; ++x) {
      if (m.pattern(y, x)) {
        continue;
      }
      double const dy = static_cast<double>(y - ny / 2) / sy;
      double const dx = static_cast<double>(x - nx / 2) / sx;
      double const logw = -0.5 * (dy * dy + dx * dx);
      double u = rng.uniform();
      while (u <= 0.0) {
        u = rng.uniform();
      }
      // log(u)/w compared in log space: log(-log u) - log w, smaller wins
      candidates.push_back({std::log(-std::log(u)) - logw, y * nx + x});
    }
  }
  auto const need = static_cast<std::size_t>(total - acs_count);
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(need), candidates.end(),
                    [](Candidate const &a, Candidate const &b) {
                      return a.key < b.key || (a.key == b.key && a.pos < b.pos);
                    });
  for (std::size_t i = 0; i < need; ++i) {
    m.pattern(candidates[i].pos / nx, candidates[i].pos % nx) = 1;
  }
  return m;
}

} // namespace comnet
