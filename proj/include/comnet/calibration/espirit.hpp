#pragma once

#include "../core/fft.hpp"
#include "../core/linalg.hpp"
#include "sensitivities.hpp"
#include "spirit.hpp"

namespace comnet {

struct EspiritOptions
{
  Index kernel_h = 6;
  Index kernel_w = 6;
  double sv_threshold = 0.02;
  double eig_threshold = 0.9;
};

// Single-set ESPIRiT:
//  1. calibration matrix of all kh x kw x nc ACS patches, SVD;
//  2. right-singular vectors with s_i > sv_threshold * s_1 span the signal
//     subspace; each is a multi-coil k-space kernel;
//  3. every kernel is zero-padded to the image grid and inverse transformed,
//     giving h_j(q) in C^nc per pixel;
//  4. W(q) = (1 / (kh kw)) sum_j h_j(q) h_j(q)^H; its leading eigenvector is
//     the sensitivity vector and the eigenvalue (at most 1) measures
//     consistency;
//  5. support = {q : lambda_max(q) > eig_threshold}; maps are rotated so that
//     coil 0 is real and nonnegative, and zeroed off support.
inline CoilSensitivities estimate_sensitivities(MultiCoilKspace const &acs, Index ny, Index nx,
                                                EspiritOptions const &opt = {})
{
  if (acs.coils() < 1 || acs.rows() < 1 || acs.cols() < 1) {
    throw MissingCalibration("estimate_sensitivities: empty ACS");
  }
  if (!(opt.sv_threshold > 0.0 && opt.sv_threshold < 1.0) || !(opt.eig_threshold > 0.0 && opt.eig_threshold < 1.0)) {
    throw InvalidArgument("estimate_sensitivities: thresholds must lie in (0, 1)");
  }
  Index const kh = opt.kernel_h;
  Index const kw = opt.kernel_w;
  if (kh < 1 || kw < 1 || acs.rows() < kh || acs.cols() < kw) {
    throw InvalidArgument("estimate_sensitivities: ACS " + shape_string(acs.rows(), acs.cols()) +
                          " smaller than calibration kernel " + shape_string(kh, kw));
  }
  if (ny < kh || nx < kw) {
    throw InvalidArgument("estimate_sensitivities: output grid smaller than calibration kernel");
  }
  require_finite(acs.flat(), "estimate_sensitivities");

  Index const nc = acs.coils();
  CMatrix const cal = detail::neighborhood_matrix(acs, kh, kw);
  Svd const dec = svd(cal);
  double const s1 = dec.s.size() > 0 ? dec.s(0) : 0.0;
  Index kept = 0;
  while (kept < dec.s.size() && s1 > 0.0 && dec.s(kept) > opt.sv_threshold * s1) {
    ++kept;
  }
  if (kept == 0) {
    throw CalibrationFailure("estimate_sensitivities: signal subspace is empty (ACS carries no energy)");
  }

  // Image-space kernels, laid out [kept][nc] planes.
  Index const taps = kh * kw;
  double const root_n = std::sqrt(static_cast<double>(ny * nx));
  std::vector<MultiCoilImage> h;
  h.reserve(static_cast<std::size_t>(kept));
  for (Index j = 0; j < kept; ++j) {
    MultiCoilKspace placed(nc, ny, nx);
    for (Index c = 0; c < nc; ++c) {
      for (Index dy = 0; dy < kh; ++dy) {
        for (Index dx = 0; dx < kw; ++dx) {
          placed(c, ny / 2 - kh / 2 + dy, nx / 2 - kw / 2 + dx) = dec.vh(j, c * taps + dy * kw + dx);
        }
      }
    }
    MultiCoilImage img = ifft2c(placed);
    for (Cx &z : img.flat()) {
      z *= root_n;
    }
    h.push_back(std::move(img));
  }

  CoilSensitivities out{MultiCoilImage(nc, ny, nx), ByteImage::Zero(ny, nx)};
  double const inv_taps = 1.0 / static_cast<double>(taps);
  CMatrix w(nc, nc);
  CVector v(nc);
  for (Index y = 0; y < ny; ++y) {
    for (Index x = 0; x < nx; ++x) {
      w.setZero();
      for (Index j = 0; j < kept; ++j) {
        for (Index c = 0; c < nc; ++c) {
          v(c) = h[static_cast<std::size_t>(j)](c, y, x);
        }
        w.noalias() += v * v.adjoint();
      }
      w *= inv_taps;
      HermitianEig const eig = eigh(w);
      if (!(eig.values(0) > opt.eig_threshold)) {
        continue;
      }
      CVector map = eig.vectors.col(0);
      map /= map.norm();
      if (std::abs(map(0)) > 0.0) {
        map *= std::conj(map(0)) / std::abs(map(0));
        map(0) = Cx{std::abs(map(0)), 0.0};
      }
      out.support(y, x) = 1;
      for (Index c = 0; c < nc; ++c) {
        out.maps(c, y, x) = map(c);
      }
    }
  }
  return out;
}

} // namespace comnet
