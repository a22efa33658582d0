#pragma once

#include "../core/error.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace comnet {

struct AdamOptions
{
  double lr = 1e-4;
  double beta1 = 0.90;
  double beta2 = 0.99;
  double eps = 1e-8;
};

// Moments for one parameter tensor.
struct AdamState
{
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;

  explicit AdamState(std::size_t n = 0)
    : m(n, 0.0)
    , v(n, 0.0)
  {
  }
};

// Bias-corrected Adam update, in place.
inline void adam_step(std::span<double> params, std::span<double const> grads, AdamState &s, AdamOptions const &o)
{
  if (params.size() != grads.size() || params.size() != s.m.size()) {
    throw InvalidArgument("adam_step: parameter, gradient and state sizes differ");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw NumericFailure("adam_step: non-finite gradient");
    }
  }
  ++s.t;
  double const c1 = 1.0 - std::pow(o.beta1, static_cast<double>(s.t));
  double const c2 = 1.0 - std::pow(o.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = o.beta1 * s.m[i] + (1.0 - o.beta1) * grads[i];
    s.v[i] = o.beta2 * s.v[i] + (1.0 - o.beta2) * grads[i] * grads[i];
    double const mhat = s.m[i] / c1;
    double const vhat = s.v[i] / c2;
    if (mhat != 0.0) {
      params[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
  }
}

} // namespace comnet
