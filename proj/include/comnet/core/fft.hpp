#pragma once

#include "array.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <vector>

namespace comnet {

namespace detail {

inline Eigen::FFT<double> &fft_engine()
{
  thread_local Eigen::FFT<double> engine = [] {
    Eigen::FFT<double> e;
    e.SetFlag(Eigen::FFT<double>::Unscaled);
    return e;
  }();
  return engine;
}

// Centered, orthonormal 2-D DFT. The array center sits at floor(n/2) on each
// axis: the input is ifftshifted, transformed, fftshifted, scaled by
// 1/sqrt(ny*nx).
template <typename In, typename Out>
void fft2c_impl(In const &in, Out &&out, bool inverse)
{
  Index const ny = in.rows();
  Index const nx = in.cols();
  auto &engine = fft_engine();
  ComplexImage work(ny, nx);
  // ifftshift: work[i] = in[(i + floor(n/2)) % n]
  for (Index y = 0; y < ny; ++y) {
    Index const sy = (y + ny / 2) % ny;
    for (Index x = 0; x < nx; ++x) {
      work(y, x) = in(sy, (x + nx / 2) % nx);
    }
  }
  std::vector<Cx> src, dst;
  src.resize(static_cast<std::size_t>(nx));
  for (Index y = 0; y < ny; ++y) {
    for (Index x = 0; x < nx; ++x) {
      src[static_cast<std::size_t>(x)] = work(y, x);
    }
    if (inverse) {
      engine.inv(dst, src);
    } else {
      engine.fwd(dst, src);
    }
    for (Index x = 0; x < nx; ++x) {
      work(y, x) = dst[static_cast<std::size_t>(x)];
    }
  }
  src.resize(static_cast<std::size_t>(ny));
  for (Index x = 0; x < nx; ++x) {
    for (Index y = 0; y < ny; ++y) {
      src[static_cast<std::size_t>(y)] = work(y, x);
    }
    if (inverse) {
      engine.inv(dst, src);
    } else {
      engine.fwd(dst, src);
    }
    for (Index y = 0; y < ny; ++y) {
      work(y, x) = dst[static_cast<std::size_t>(y)];
    }
  }
  double const scale = 1.0 / std::sqrt(static_cast<double>(ny * nx));
  // fftshift: out[i] = work[(i + ceil(n/2)) % n]
  for (Index y = 0; y < ny; ++y) {
    Index const sy = (y + (ny + 1) / 2) % ny;
    for (Index x = 0; x < nx; ++x) {
      out(y, x) = work(sy, (x + (nx + 1) / 2) % nx) * scale;
    }
  }
}

} // namespace detail

inline ComplexImage fft2c(ComplexImage const &img)
{
  require_finite(as_span(img), "fft2c");
  ComplexImage out(img.rows(), img.cols());
  detail::fft2c_impl(img, out, false);
  return out;
}

inline ComplexImage ifft2c(ComplexImage const &ksp)
{
  require_finite(as_span(ksp), "ifft2c");
  ComplexImage out(ksp.rows(), ksp.cols());
  detail::fft2c_impl(ksp, out, true);
  return out;
}

inline MultiCoilKspace fft2c(MultiCoilImage const &img)
{
  require_finite(img.flat(), "fft2c");
  MultiCoilKspace out(img.coils(), img.rows(), img.cols());
  for (Index c = 0; c < img.coils(); ++c) {
    detail::fft2c_impl(img.coil(c), out.coil(c), false);
  }
  return out;
}

inline MultiCoilImage ifft2c(MultiCoilKspace const &ksp)
{
  require_finite(ksp.flat(), "ifft2c");
  MultiCoilImage out(ksp.coils(), ksp.rows(), ksp.cols());
  for (Index c = 0; c < ksp.coils(); ++c) {
    detail::fft2c_impl(ksp.coil(c), out.coil(c), true);
  }
  return out;
}

} // namespace comnet
