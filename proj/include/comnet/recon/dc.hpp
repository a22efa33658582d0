#pragma once

#include "../data/zero_filled.hpp"

namespace comnet {

// Data-consistency weighting. Hard mode replaces sampled entries with the
// measurements; soft mode blends them as (lambda*y + k) / (1 + lambda).
struct DCConfig
{
  bool hard = true;
  double lambda = 0.0;

  static DCConfig hard_mode() { return {true, 0.0}; }
  static DCConfig soft(double lambda)
  {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw InvalidArgument("DCConfig: lambda must be a positive finite number");
    }
    return {false, lambda};
  }

  bool operator==(DCConfig const &) const = default;
};

inline MultiCoilKspace dc_project(MultiCoilKspace const &ksp, MultiCoilKspace const &y, SamplingMask const &mask,
                                  DCConfig const &dc)
{
  if (!ksp.same_shape(y)) {
    throw InvalidArgument("dc_project: estimate " + shape_string(ksp) + " and measurements " + shape_string(y) +
                          " differ in shape");
  }
  require_mask_shape(ksp.rows(), ksp.cols(), mask, "dc_project");
  MultiCoilKspace out = ksp;
  double const a = dc.hard ? 1.0 : dc.lambda / (1.0 + dc.lambda);
  double const b = dc.hard ? 0.0 : 1.0 / (1.0 + dc.lambda);
  Index const plane = ksp.plane_size();
  std::uint8_t const *m = mask.pattern.data();
  for (Index c = 0; c < ksp.coils(); ++c) {
    for (Index i = 0; i < plane; ++i) {
      if (m[i]) {
        Index const j = c * plane + i;
        out.flat()[static_cast<std::size_t>(j)] =
          dc.hard ? y.flat()[static_cast<std::size_t>(j)]
                  : a * y.flat()[static_cast<std::size_t>(j)] + b * ksp.flat()[static_cast<std::size_t>(j)];
      }
    }
  }
  return out;
}

// ||mask * (k - y)|| / ||mask * y||
inline double dc_violation(MultiCoilKspace const &k, MultiCoilKspace const &y, SamplingMask const &mask)
{
  require_mask_shape(k.rows(), k.cols(), mask, "dc_violation");
  double num = 0.0;
  double den = 0.0;
  Index const plane = k.plane_size();
  for (Index c = 0; c < k.coils(); ++c) {
    for (Index i = 0; i < plane; ++i) {
      if (mask.pattern.data()[i]) {
        auto const j = static_cast<std::size_t>(c * plane + i);
        num += std::norm(k.flat()[j] - y.flat()[j]);
        den += std::norm(y.flat()[j]);
      }
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

} // namespace comnet
