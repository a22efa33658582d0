#pragma once

#include "array.hpp"

#include <cmath>

namespace comnet {

// Proximal operator of tau*|.|: shrink the magnitude, keep the phase.
inline Cx soft_threshold(Cx x, double tau)
{
  double const mag = std::abs(x);
  if (mag <= tau) {
    return {0.0, 0.0};
  }
  return x * ((mag - tau) / mag);
}

inline void check_threshold(double tau)
{
  if (!(tau >= 0.0)) {
    throw InvalidArgument("soft_threshold: tau must be nonnegative, got " + std::to_string(tau));
  }
}

inline ComplexImage soft_threshold(ComplexImage const &x, double tau)
{
  check_threshold(tau);
  return x.unaryExpr([tau](Cx z) { return soft_threshold(z, tau); });
}

inline std::vector<Cx> soft_threshold(std::span<Cx const> x, double tau)
{
  check_threshold(tau);
  std::vector<Cx> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = soft_threshold(x[i], tau);
  }
  return out;
}

} // namespace comnet
