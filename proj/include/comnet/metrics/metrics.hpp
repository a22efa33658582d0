#pragma once

#include "../core/array.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace comnet {

namespace detail {

inline void require_same(ComplexImage const &a, ComplexImage const &b, char const *op)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": images differ in shape (" + shape_string(a.rows(), a.cols()) +
                          " vs " + shape_string(b.rows(), b.cols()) + ")");
  }
}

} // namespace detail

// 20 log10(max|ref| / rmse(|recon|, |ref|)); +inf when the magnitudes agree.
inline double psnr(ComplexImage const &recon, ComplexImage const &ref)
{
  detail::require_same(recon, ref, "psnr");
  RealImage const a = recon.abs();
  RealImage const b = ref.abs();
  double const peak = b.maxCoeff();
  if (!(peak > 0.0)) {
    throw InvalidArgument("psnr: reference image is all zero");
  }
  double const mse = (a - b).square().mean();
  if (mse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

struct SsimOptions
{
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  std::optional<double> dynamic_range; // defaults to max |ref|
};

namespace detail {

// Gaussian-weighted local mean over every fully contained window.
inline RealImage gaussian_valid(RealImage const &img, std::vector<double> const &g)
{
  Index const k = static_cast<Index>(g.size());
  Index const oy = img.rows() - k + 1;
  Index const ox = img.cols() - k + 1;
  RealImage tmp(img.rows(), ox);
  for (Index y = 0; y < img.rows(); ++y) {
    for (Index x = 0; x < ox; ++x) {
      double acc = 0.0;
      for (Index i = 0; i < k; ++i) {
        acc += g[static_cast<std::size_t>(i)] * img(y, x + i);
      }
      tmp(y, x) = acc;
    }
  }
  RealImage out(oy, ox);
  for (Index y = 0; y < oy; ++y) {
    for (Index x = 0; x < ox; ++x) {
      double acc = 0.0;
      for (Index i = 0; i < k; ++i) {
        acc += g[static_cast<std::size_t>(i)] * tmp(y + i, x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

} // namespace detail

// Mean SSIM of the magnitude images (Wang et al. 2004 constants).
inline double ssim(ComplexImage const &recon, ComplexImage const &ref, SsimOptions const &opt = {})
{
  detail::require_same(recon, ref, "ssim");
  if (recon.rows() < opt.window || recon.cols() < opt.window) {
    throw InvalidArgument("ssim: images must be at least " + shape_string(opt.window, opt.window));
  }
  RealImage const a = recon.abs();
  RealImage const b = ref.abs();
  double const range = opt.dynamic_range.value_or(b.maxCoeff());
  if (!(range > 0.0)) {
    throw InvalidArgument("ssim: dynamic range must be positive (reference all zero?)");
  }
  std::vector<double> g(static_cast<std::size_t>(opt.window));
  double gs = 0.0;
  for (int i = 0; i < opt.window; ++i) {
    double const d = i - (opt.window - 1) / 2.0;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * opt.sigma * opt.sigma));
    gs += g[static_cast<std::size_t>(i)];
  }
  for (double &v : g) {
    v /= gs;
  }
  RealImage const mu_a = detail::gaussian_valid(a, g);
  RealImage const mu_b = detail::gaussian_valid(b, g);
  RealImage const var_a = detail::gaussian_valid(a * a, g) - mu_a * mu_a;
  RealImage const var_b = detail::gaussian_valid(b * b, g) - mu_b * mu_b;
  RealImage const cov = detail::gaussian_valid(a * b, g) - mu_a * mu_b;
  double const c1 = (opt.k1 * range) * (opt.k1 * range);
  double const c2 = (opt.k2 * range) * (opt.k2 * range);
  RealImage const num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
  RealImage const den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
  return (num / den).mean();
}

} // namespace comnet
