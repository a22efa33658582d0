#pragma once

#include "../calibration/sensitivities.hpp"
#include "../core/fft.hpp"
#include "../core/random.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace comnet {

struct PhantomCase
{
  ComplexImage reference;
  CoilSensitivities sensitivities;
  MultiCoilKspace kspace; // fully sampled, kspace[c] = fft2c(maps[c] * reference)
  std::uint64_t seed = 0;
};

namespace detail {

struct Ellipse
{
  double intensity;
  double a; // semi-axis along x
  double b; // semi-axis along y
  double x0;
  double y0;
  double phi_deg;
};

// Modified Shepp-Logan (Toft) in normalized [-1, 1) coordinates.
inline constexpr std::array<Ellipse, 10> shepp_logan{{
  {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
  {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
  {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
  {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
  {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
  {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
  {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
  {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
  {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
  {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
}};

inline double coord(Index i, Index n) { return static_cast<double>(i - n / 2) / (static_cast<double>(n) / 2.0); }

inline bool inside(Ellipse const &e, double x, double y)
{
  double const t = e.phi_deg * std::numbers::pi / 180.0;
  double const dx = x - e.x0;
  double const dy = y - e.y0;
  double const u = dx * std::cos(t) + dy * std::sin(t);
  double const v = -dx * std::sin(t) + dy * std::cos(t);
  return (u * u) / (e.a * e.a) + (v * v) / (e.b * e.b) <= 1.0;
}

} // namespace detail

// Magnitude: Shepp-Logan ellipses with seed-dependent jitter of position,
// size, angle and contrast, plus three small random "lesions". Phase: a
// quadratic polynomial whose coefficient l1 norm is at most pi/4, so
// |phase| <= pi/4 everywhere.
inline ComplexImage phantom_image(Index ny, Index nx, std::uint64_t seed)
{
  SplitMix64 rng(derive_seed(seed, 1));
  std::vector<detail::Ellipse> ellipses(detail::shepp_logan.begin(), detail::shepp_logan.end());
  double const head_scale = rng.uniform(0.7, 0.8);
  for (std::size_t i = 0; i < ellipses.size(); ++i) {
    auto &e = ellipses[i];
    double const s = i < 2 ? 1.0 : rng.uniform(0.85, 1.15);
    e.a *= head_scale * s;
    e.b *= head_scale * (i < 2 ? 1.0 : rng.uniform(0.85, 1.15));
    e.x0 = head_scale * e.x0 + (i < 2 ? 0.0 : rng.uniform(-0.04, 0.04));
    e.y0 = head_scale * e.y0 + (i < 2 ? 0.0 : rng.uniform(-0.04, 0.04));
    e.phi_deg += i < 2 ? rng.uniform(-5.0, 5.0) : rng.uniform(-10.0, 10.0);
    if (i >= 2) {
      e.intensity *= rng.uniform(0.6, 1.4);
    }
  }
  for (int k = 0; k < 3; ++k) {
    double const r = 0.45 * head_scale * std::sqrt(rng.uniform());
    double const t = 2.0 * std::numbers::pi * rng.uniform();
    ellipses.push_back({rng.uniform(-0.15, 0.25), rng.uniform(0.03, 0.08), rng.uniform(0.03, 0.08), r * std::cos(t),
                        r * std::sin(t), rng.uniform(0.0, 180.0)});
  }

  std::array<double, 6> poly{};
  double l1 = 0.0;
  for (double &c : poly) {
    c = rng.uniform(-1.0, 1.0);
    l1 += std::abs(c);
  }
  double const budget = rng.uniform(0.5, 1.0) * std::numbers::pi / 4.0;
  for (double &c : poly) {
    c *= budget / l1;
  }

  ComplexImage img(ny, nx);
  for (Index iy = 0; iy < ny; ++iy) {
    double const y = detail::coord(iy, ny);
    for (Index ix = 0; ix < nx; ++ix) {
      double const x = detail::coord(ix, nx);
      double mag = 0.0;
      for (auto const &e : ellipses) {
        if (detail::inside(e, x, y)) {
          mag += e.intensity;
        }
      }
      mag = std::max(mag, 0.0);
      double const phase = poly[0] + poly[1] * x + poly[2] * y + poly[3] * x * y + poly[4] * x * x + poly[5] * y * y;
      img(iy, ix) = std::polar(mag, phase);
    }
  }
  return img;
}

// Gaussian bumps centered just outside the FOV at equally spaced angles,
// each with a linear phase ramp, normalized to unit norm per pixel.
inline CoilSensitivities phantom_sensitivities(Index nc, Index ny, Index nx, std::uint64_t seed)
{
  SplitMix64 rng(derive_seed(seed, 2));
  CoilSensitivities s{MultiCoilImage(nc, ny, nx), ByteImage::Ones(ny, nx)};
  double const sigma = 0.7;
  for (Index c = 0; c < nc; ++c) {
    double const theta = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(nc) +
                         rng.uniform(-0.15, 0.15);
    double const cx = 1.1 * std::cos(theta);
    double const cy = 1.1 * std::sin(theta);
    double const p0 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    double const px = rng.uniform(-0.6, 0.6);
    double const py = rng.uniform(-0.6, 0.6);
    for (Index iy = 0; iy < ny; ++iy) {
      double const y = detail::coord(iy, ny);
      for (Index ix = 0; ix < nx; ++ix) {
        double const x = detail::coord(ix, nx);
        double const d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        s.maps(c, iy, ix) = std::polar(std::exp(-d2 / (2.0 * sigma * sigma)), p0 + px * x + py * y);
      }
    }
  }
  normalize_maps(s);
  return s;
}

inline PhantomCase generate_phantom(Index nc, Index ny, Index nx, std::uint64_t seed)
{
  if (nc < 2) {
    throw InvalidArgument("generate_phantom: need at least 2 coils, got " + std::to_string(nc));
  }
  if (ny < 8 || nx < 8) {
    throw InvalidArgument("generate_phantom: image must be at least 8x8, got " + shape_string(ny, nx));
  }
  PhantomCase pc;
  pc.seed = seed;
  pc.reference = phantom_image(ny, nx, seed);
  pc.sensitivities = phantom_sensitivities(nc, ny, nx, seed);
  MultiCoilImage coils(nc, ny, nx);
  for (Index c = 0; c < nc; ++c) {
    coils.coil(c) = pc.sensitivities.maps.coil(c) * pc.reference;
  }
  pc.kspace = fft2c(coils);
  return pc;
}

} // namespace comnet
