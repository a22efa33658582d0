#pragma once

#include "../core/random.hpp"
#include "conv.hpp"

#include <array>
#include <cmath>
#include <string>

namespace comnet {

inline constexpr Index nc_layers = 5;
inline constexpr Index default_nc_channels = 64;

// One real-valued branch: conv(1->C) ReLU, 3 x [conv(C->C) ReLU], conv(C->1).
struct NCBranch
{
  std::array<ConvLayer, nc_layers> layers;
  bool operator==(NCBranch const &) const = default;
};

// The learned prior C(.; theta): separate branches for the real and the
// imaginary part, each with a residual skip. Shared by every cascade stage.
struct NCWeights
{
  Index channels = default_nc_channels;
  NCBranch real;
  NCBranch imag;

  static NCWeights zeros(Index channels = default_nc_channels)
  {
    if (channels < 1) {
      throw InvalidArgument("NCWeights: channel count must be positive");
    }
    NCWeights w;
    w.channels = channels;
    for (NCBranch *b : {&w.real, &w.imag}) {
      b->layers[0] = ConvLayer(channels, 1);
      for (Index l = 1; l < nc_layers - 1; ++l) {
        b->layers[static_cast<std::size_t>(l)] = ConvLayer(channels, channels);
      }
      b->layers[nc_layers - 1] = ConvLayer(1, channels);
    }
    return w;
  }

  // He-uniform weights (bound sqrt(6 / fan_in)), zero biases. Drawn in the
  // order real layers 0..4 then imag layers 0..4, each tensor row-major.
  static NCWeights he_uniform(Index channels, std::uint64_t seed)
  {
    NCWeights w = zeros(channels);
    SplitMix64 rng(derive_seed(seed, 10));
    for (NCBranch *b : {&w.real, &w.imag}) {
      for (ConvLayer &l : b->layers) {
        double const bound = std::sqrt(6.0 / static_cast<double>(l.in_channels * 9));
        for (double &v : l.weight) {
          v = rng.uniform(-bound, bound);
        }
      }
    }
    return w;
  }

  // Every tensor in storage order: per branch, weight then bias per layer.
  template <typename F>
  void for_each_tensor(F &&f)
  {
    for (NCBranch *b : {&real, &imag}) {
      for (ConvLayer &l : b->layers) {
        f(l.weight);
        f(l.bias);
      }
    }
  }
  template <typename F>
  void for_each_tensor(F &&f) const
  {
    for (NCBranch const *b : {&real, &imag}) {
      for (ConvLayer const &l : b->layers) {
        f(l.weight);
        f(l.bias);
      }
    }
  }

  Index parameter_count() const
  {
    Index n = 0;
    for_each_tensor([&n](std::vector<double> const &t) { n += static_cast<Index>(t.size()); });
    return n;
  }

  void validate() const
  {
    for (NCBranch const *b : {&real, &imag}) {
      for (Index l = 0; l < nc_layers; ++l) {
        ConvLayer const &layer = b->layers[static_cast<std::size_t>(l)];
        Index const in = l == 0 ? 1 : channels;
        Index const out = l == nc_layers - 1 ? 1 : channels;
        if (layer.in_channels != in || layer.out_channels != out ||
            layer.weight.size() != static_cast<std::size_t>(in * out * 9) ||
            layer.bias.size() != static_cast<std::size_t>(out)) {
          throw InvalidArgument("NCWeights: layer " + std::to_string(l) + " has the wrong shape");
        }
      }
    }
    for_each_tensor([](std::vector<double> const &t) {
      for (double v : t) {
        if (!std::isfinite(v)) {
          throw InvalidArgument("NCWeights: non-finite weight");
        }
      }
    });
  }

  bool operator==(NCWeights const &) const = default;
};

namespace detail {

inline void check_activations(std::vector<double> const &a, char const *branch, Index layer)
{
  for (double v : a) {
    if (!std::isfinite(v)) {
      throw NumericFailure(std::string("nc_forward: non-finite activation in ") + branch + " branch, layer " +
                           std::to_string(layer));
    }
  }
}

// Returns input + branch(input) for one real channel.
inline std::vector<double> nc_branch_forward(NCBranch const &b, std::vector<double> const &x, Index h, Index w,
                                             Precision p, char const *name)
{
  std::vector<double> cur = x;
  for (Index l = 0; l < nc_layers; ++l) {
    ConvLayer const &layer = b.layers[static_cast<std::size_t>(l)];
    std::vector<double> next(static_cast<std::size_t>(layer.out_channels * h * w));
    conv_forward(layer, cur.data(), h, w, next.data(), p);
    if (l < nc_layers - 1) {
      for (double &v : next) {
        v = v > 0.0 ? v : 0.0;
      }
    }
    check_activations(next, name, l);
    cur = std::move(next);
  }
  for (std::size_t i = 0; i < cur.size(); ++i) {
    cur[i] += x[i];
  }
  return cur;
}

} // namespace detail

inline ComplexImage nc_forward(ComplexImage const &img, NCWeights const &w, Precision p = Precision::Double)
{
  require_finite(as_span(img), "nc_forward");
  Index const h = img.rows();
  Index const wd = img.cols();
  std::vector<double> re(static_cast<std::size_t>(h * wd));
  std::vector<double> im(re.size());
  for (Index i = 0; i < img.size(); ++i) {
    re[static_cast<std::size_t>(i)] = img.data()[i].real();
    im[static_cast<std::size_t>(i)] = img.data()[i].imag();
  }
  auto const out_re = detail::nc_branch_forward(w.real, re, h, wd, p, "real");
  auto const out_im = detail::nc_branch_forward(w.imag, im, h, wd, p, "imag");
  ComplexImage out(h, wd);
  for (Index i = 0; i < img.size(); ++i) {
    out.data()[i] = Cx{out_re[static_cast<std::size_t>(i)], out_im[static_cast<std::size_t>(i)]};
  }
  return out;
}

} // namespace comnet
