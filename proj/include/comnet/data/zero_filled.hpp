#pragma once

#include "../calibration/sensitivities.hpp"
#include "../core/fft.hpp"
#include "mask.hpp"

namespace comnet {

inline void require_mask_shape(Index ny, Index nx, SamplingMask const &mask, char const *op)
{
  if (mask.rows() != ny || mask.cols() != nx) {
    throw InvalidArgument(std::string(op) + ": mask shape " + shape_string(mask.rows(), mask.cols()) +
                          " does not match data " + shape_string(ny, nx));
  }
}

// mask * ksp, coil by coil.
inline MultiCoilKspace apply_mask(MultiCoilKspace const &ksp, SamplingMask const &mask)
{
  require_mask_shape(ksp.rows(), ksp.cols(), mask, "apply_mask");
  MultiCoilKspace out = ksp;
  for (Index c = 0; c < ksp.coils(); ++c) {
    out.coil(c) = (mask.pattern != 0).select(ksp.coil(c), Cx{0.0, 0.0});
  }
  return out;
}

// x^u = A* ifft2c(mask * ksp)
inline ComplexImage zero_filled(MultiCoilKspace const &ksp, SamplingMask const &mask, CoilSensitivities const &sens)
{
  detail::require_shape(ksp, sens, "zero_filled");
  return coil_combine(ifft2c(apply_mask(ksp, mask)), sens);
}

// Root-sum-of-squares combination of coil images.
inline RealImage rss(MultiCoilImage const &mimg)
{
  RealImage out = RealImage::Zero(mimg.rows(), mimg.cols());
  for (Index c = 0; c < mimg.coils(); ++c) {
    out += mimg.coil(c).abs2();
  }
  return out.sqrt();
}

} // namespace comnet
