#pragma once

#include "../core/array.hpp"

namespace comnet {

// Per-pixel coil maps. On support the maps have unit l2 norm across coils,
// outside it they are identically zero, so A*A is the indicator of support.
struct CoilSensitivities
{
  MultiCoilImage maps;
  ByteImage support;

  Index coils() const { return maps.coils(); }
  Index rows() const { return maps.rows(); }
  Index cols() const { return maps.cols(); }
};

namespace detail {

template <typename D>
void require_shape(CoilArray<D> const &a, CoilSensitivities const &s, char const *op)
{
  if (a.coils() != s.coils() || a.rows() != s.rows() || a.cols() != s.cols()) {
    throw InvalidArgument(std::string(op) + ": data shape " + shape_string(a) + " does not match sensitivities " +
                          shape_string(s.maps));
  }
}

inline void require_shape(ComplexImage const &img, CoilSensitivities const &s, char const *op)
{
  if (img.rows() != s.rows() || img.cols() != s.cols()) {
    throw InvalidArgument(std::string(op) + ": image shape " + shape_string(img.rows(), img.cols()) +
                          " does not match sensitivities " + shape_string(s.maps));
  }
}

} // namespace detail

// A: out[c] = maps[c] * img
inline MultiCoilImage coil_project(ComplexImage const &img, CoilSensitivities const &sens)
{
  detail::require_shape(img, sens, "coil_project");
  MultiCoilImage out(sens.coils(), sens.rows(), sens.cols());
  for (Index c = 0; c < sens.coils(); ++c) {
    out.coil(c) = sens.maps.coil(c) * img;
  }
  return out;
}

// A*: out = sum_c conj(maps[c]) * mimg[c]
inline ComplexImage coil_combine(MultiCoilImage const &mimg, CoilSensitivities const &sens)
{
  detail::require_shape(mimg, sens, "coil_combine");
  ComplexImage out = ComplexImage::Zero(sens.rows(), sens.cols());
  for (Index c = 0; c < sens.coils(); ++c) {
    out += sens.maps.coil(c).conjugate() * mimg.coil(c);
  }
  return out;
}

// Scale each pixel's coil vector to unit norm; pixels whose norm is below
// `floor` are zeroed and dropped from support.
inline void normalize_maps(CoilSensitivities &sens, double floor = 1e-12)
{
  Index const nc = sens.coils();
  for (Index y = 0; y < sens.rows(); ++y) {
    for (Index x = 0; x < sens.cols(); ++x) {
      double n2 = 0.0;
      for (Index c = 0; c < nc; ++c) {
        n2 += std::norm(sens.maps(c, y, x));
      }
      double const n = std::sqrt(n2);
      bool const keep = sens.support(y, x) != 0 && n > floor;
      for (Index c = 0; c < nc; ++c) {
        sens.maps(c, y, x) = keep ? sens.maps(c, y, x) / n : Cx{0.0, 0.0};
      }
      sens.support(y, x) = keep ? 1 : 0;
    }
  }
}

} // namespace comnet
