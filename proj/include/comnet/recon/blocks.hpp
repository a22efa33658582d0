#pragma once

#include "../calibration/spirit.hpp"
#include "dc.hpp"

namespace comnet {

// Multi-coil estimate together with its coil-combined image A* F^-1 k.
struct Reconstruction
{
  MultiCoilKspace kspace;
  ComplexImage image;
};

// A* F^-1 k
inline ComplexImage to_image(MultiCoilKspace const &k, CoilSensitivities const &sens)
{
  return coil_combine(ifft2c(k), sens);
}

// F A x
inline MultiCoilKspace to_kspace(ComplexImage const &x, CoilSensitivities const &sens)
{
  return fft2c(coil_project(x, sens));
}

// n_proj rounds of k <- DC(G k).
inline MultiCoilKspace cc_block(MultiCoilKspace const &ksp, SpiritOperator const &g, MultiCoilKspace const &y,
                                SamplingMask const &mask, DCConfig const &dc, Index n_proj = 5)
{
  if (g.coils() != ksp.coils()) {
    throw InvalidArgument("cc_block: kernel has " + std::to_string(g.coils()) + " coils, data has " +
                          std::to_string(ksp.coils()));
  }
  if (n_proj < 0) {
    throw InvalidArgument("cc_block: n_proj must be >= 0");
  }
  MultiCoilKspace k = ksp;
  for (Index i = 0; i < n_proj; ++i) {
    k = dc_project(g.apply(k), y, mask, dc);
  }
  return k;
}

inline MultiCoilKspace cc_block(MultiCoilKspace const &ksp, SpiritKernel const &g, MultiCoilKspace const &y,
                                SamplingMask const &mask, DCConfig const &dc, Index n_proj = 5)
{
  if (g.coils() != ksp.coils()) {
    throw InvalidArgument("cc_block: kernel has " + std::to_string(g.coils()) + " coils, data has " +
                          std::to_string(ksp.coils()));
  }
  return cc_block(ksp, SpiritOperator(g, ksp.rows(), ksp.cols()), y, mask, dc, n_proj);
}

} // namespace comnet
