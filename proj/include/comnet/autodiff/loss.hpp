#pragma once

#include "../core/array.hpp"

#include <cmath>

namespace comnet {

struct LossWeights
{
  double l1 = 1.0;
  double l2 = 1.0;
};

// l1 * mean(|d_re| + |d_im|) + l2 * sqrt(mean(|d|^2)), d = recon - ref.
inline double loss(ComplexImage const &recon, ComplexImage const &ref, LossWeights const &w = {})
{
  if (recon.rows() != ref.rows() || recon.cols() != ref.cols()) {
    throw InvalidArgument("loss: reconstruction " + shape_string(recon.rows(), recon.cols()) + " and reference " +
                          shape_string(ref.rows(), ref.cols()) + " differ in shape");
  }
  double l1 = 0.0;
  double l2 = 0.0;
  for (Index i = 0; i < ref.size(); ++i) {
    Cx const d = recon.data()[i] - ref.data()[i];
    l1 += std::abs(d.real()) + std::abs(d.imag());
    l2 += std::norm(d);
  }
  double const n = static_cast<double>(ref.size());
  return w.l1 * l1 / n + w.l2 * std::sqrt(l2 / n);
}

} // namespace comnet
