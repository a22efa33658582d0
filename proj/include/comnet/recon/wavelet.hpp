#pragma once

#include "../core/array.hpp"

#include <numbers>

namespace comnet {

namespace detail {

inline void haar_step(Cx *v, Index n, Index stride, std::vector<Cx> &tmp, bool inverse)
{
  double const r = std::numbers::sqrt2 / 2.0;
  Index const half = n / 2;
  tmp.resize(static_cast<std::size_t>(n));
  if (!inverse) {
    for (Index i = 0; i < half; ++i) {
      Cx const a = v[2 * i * stride];
      Cx const b = v[(2 * i + 1) * stride];
      tmp[static_cast<std::size_t>(i)] = r * (a + b);
      tmp[static_cast<std::size_t>(half + i)] = r * (a - b);
    }
  } else {
    for (Index i = 0; i < half; ++i) {
      Cx const s = v[i * stride];
      Cx const d = v[(half + i) * stride];
      tmp[static_cast<std::size_t>(2 * i)] = r * (s + d);
      tmp[static_cast<std::size_t>(2 * i + 1)] = r * (s - d);
    }
  }
  for (Index i = 0; i < n; ++i) {
    v[i * stride] = tmp[static_cast<std::size_t>(i)];
  }
}

inline void check_levels(Index ny, Index nx, int levels)
{
  if (levels < 1) {
    throw InvalidArgument("dwt2: levels must be >= 1");
  }
  Index const f = Index{1} << levels;
  if (ny % f != 0 || nx % f != 0) {
    throw InvalidArgument("dwt2: image " + shape_string(ny, nx) + " is not divisible by 2^" + std::to_string(levels));
  }
}

} // namespace detail

// Orthonormal separable Haar transform in Mallat layout: after `levels`
// steps the coarse approximation occupies the top-left
// (ny >> levels) x (nx >> levels) block.
inline ComplexImage dwt2(ComplexImage const &img, int levels)
{
  detail::check_levels(img.rows(), img.cols(), levels);
  ComplexImage c = img;
  std::vector<Cx> tmp;
  Index h = img.rows();
  Index w = img.cols();
  for (int l = 0; l < levels; ++l) {
    for (Index y = 0; y < h; ++y) {
      detail::haar_step(&c(y, 0), w, 1, tmp, false);
    }
    for (Index x = 0; x < w; ++x) {
      detail::haar_step(&c(0, x), h, c.cols(), tmp, false);
    }
    h /= 2;
    w /= 2;
  }
  return c;
}

inline ComplexImage idwt2(ComplexImage const &coef, int levels)
{
  detail::check_levels(coef.rows(), coef.cols(), levels);
  ComplexImage c = coef;
  std::vector<Cx> tmp;
  for (int l = levels - 1; l >= 0; --l) {
    Index const h = coef.rows() >> l;
    Index const w = coef.cols() >> l;
    for (Index x = 0; x < w; ++x) {
      detail::haar_step(&c(0, x), h, c.cols(), tmp, true);
    }
    for (Index y = 0; y < h; ++y) {
      detail::haar_step(&c(y, 0), w, 1, tmp, true);
    }
  }
  return c;
}

inline Index next_pow2(Index n)
{
  Index p = 1;
  while (p < n) {
    p <<= 1;
  }
  return p;
}

// Symmetric (half-sample) padding of the bottom/right edges.
inline ComplexImage pad_symmetric(ComplexImage const &img, Index ny, Index nx)
{
  ComplexImage out(ny, nx);
  auto reflect = [](Index i, Index n) {
    Index const period = 2 * n;
    i %= period;
    return i < n ? i : period - 1 - i;
  };
  for (Index y = 0; y < ny; ++y) {
    for (Index x = 0; x < nx; ++x) {
      out(y, x) = img(reflect(y, img.rows()), reflect(x, img.cols()));
    }
  }
  return out;
}

} // namespace comnet
