#pragma once

#include "../data/mask.hpp"

namespace comnet {

// The fully sampled calibration block centered in k-space.
inline MultiCoilKspace extract_acs(MultiCoilKspace const &ksp, SamplingMask const &mask)
{
  if (mask.rows() != ksp.rows() || mask.cols() != ksp.cols()) {
    throw InvalidArgument("extract_acs: mask shape " + shape_string(mask.rows(), mask.cols()) +
                          " does not match k-space " + shape_string(ksp));
  }
  Index const h = mask.acs_height;
  Index const w = mask.acs_width;
  if (h < 1 || w < 1) {
    throw MissingCalibration("extract_acs: mask has no ACS region");
  }
  Index const y0 = acs_origin(ksp.rows(), h);
  Index const x0 = acs_origin(ksp.cols(), w);
  if ((mask.pattern.block(y0, x0, h, w) == 0).any()) {
    throw MissingCalibration("extract_acs: the declared " + shape_string(h, w) + " ACS block is not fully sampled");
  }
  MultiCoilKspace acs(ksp.coils(), h, w);
  for (Index c = 0; c < ksp.coils(); ++c) {
    acs.coil(c) = ksp.coil(c).block(y0, x0, h, w);
  }
  return acs;
}

} // namespace comnet
