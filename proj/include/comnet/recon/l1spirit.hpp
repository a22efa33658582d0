#pragma once

#include "../core/ops.hpp"
#include "blocks.hpp"
#include "wavelet.hpp"

namespace comnet {

struct L1SpiritOptions
{
  Index iterations = 30;
  double tau = 0.0;
  int levels = 3;
  DCConfig dc = DCConfig::hard_mode();
};

// Joint (across-coil) soft-thresholding of the Haar detail coefficients of
// every coil image; the coarse approximation block is left untouched.
// Images whose sides are not powers of two are padded symmetrically and
// cropped back.
inline MultiCoilImage wavelet_group_shrink(MultiCoilImage const &img, double tau, int levels)
{
  check_threshold(tau);
  Index const nc = img.coils();
  Index const ny = img.rows();
  Index const nx = img.cols();
  Index const py = next_pow2(std::max(ny, Index{1} << levels));
  Index const px = next_pow2(std::max(nx, Index{1} << levels));
  std::vector<ComplexImage> coef;
  coef.reserve(static_cast<std::size_t>(nc));
  for (Index c = 0; c < nc; ++c) {
    ComplexImage const plane = img.coil(c);
    coef.push_back(dwt2(py == ny && px == nx ? plane : pad_symmetric(plane, py, px), levels));
  }
  Index const ay = py >> levels;
  Index const ax = px >> levels;
  for (Index y = 0; y < py; ++y) {
    for (Index x = 0; x < px; ++x) {
      if (y < ay && x < ax) {
        continue;
      }
      double n2 = 0.0;
      for (auto const &cf : coef) {
        n2 += std::norm(cf(y, x));
      }
      double const n = std::sqrt(n2);
      double const scale = n > tau ? (n - tau) / n : 0.0;
      for (auto &cf : coef) {
        cf(y, x) *= scale;
      }
    }
  }
  MultiCoilImage out(nc, ny, nx);
  for (Index c = 0; c < nc; ++c) {
    out.coil(c) = idwt2(coef[static_cast<std::size_t>(c)], levels).topLeftCorner(ny, nx);
  }
  return out;
}

// POCS: per iteration k <- G k, k <- DC(k), then wavelet group shrinkage of
// the coil images. A closing DC projection makes the returned k-space agree
// with the measurements.
inline Reconstruction l1spirit_recon(MultiCoilKspace const &y, SamplingMask const &mask, SpiritOperator const &g,
                                     CoilSensitivities const &sens, L1SpiritOptions const &opt)
{
  if (opt.iterations < 0) {
    throw InvalidArgument("l1spirit_recon: iterations must be >= 0");
  }
  check_threshold(opt.tau);
  detail::require_shape(y, sens, "l1spirit_recon");
  MultiCoilKspace k = apply_mask(y, mask);
  for (Index it = 0; it < opt.iterations; ++it) {
    k = dc_project(g.apply(k), y, mask, opt.dc);
    k = fft2c(wavelet_group_shrink(ifft2c(k), opt.tau, opt.levels));
  }
  k = dc_project(k, y, mask, opt.dc);
  return {k, to_image(k, sens)};
}

inline Reconstruction l1spirit_recon(MultiCoilKspace const &y, SamplingMask const &mask, SpiritKernel const &g,
                                     CoilSensitivities const &sens, L1SpiritOptions const &opt)
{
  return l1spirit_recon(y, mask, SpiritOperator(g, y.rows(), y.cols()), sens, opt);
}

} // namespace comnet
