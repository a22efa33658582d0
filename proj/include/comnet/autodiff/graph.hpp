#pragma once

#include "../recon/model.hpp"
#include "ops.hpp"

namespace comnet::ad {

// Tape leaves for every trainable tensor of a ComnetModel.
struct ModelVars
{
  std::array<std::array<Var, 2 * nc_layers>, 2> branches; // [real|imag][weight0, bias0, weight1, ...]
  std::vector<Var> gammas;
  std::vector<Var> etas;
};

// eta leaves only require gradients in COMNET mode.
inline ModelVars bind_model(Tape &t, ComnetModel const &m)
{
  ModelVars v;
  NCBranch const *branches[2] = {&m.nc.real, &m.nc.imag};
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t l = 0; l < nc_layers; ++l) {
      ConvLayer const &layer = branches[b]->layers[l];
      v.branches[b][2 * l] =
        t.leaf(layer.weight, {layer.out_channels, layer.in_channels, 3, 3}, false, true);
      v.branches[b][2 * l + 1] = t.leaf(layer.bias, {layer.out_channels}, false, true);
    }
  }
  bool const eta_trainable = m.mode == ReconMode::Comnet;
  for (Index p = 0; p < m.stages(); ++p) {
    v.gammas.push_back(t.leaf({m.gammas[static_cast<std::size_t>(p)]}, {1}, false, true));
    v.etas.push_back(t.leaf({m.etas[static_cast<std::size_t>(p)]}, {1}, false, eta_trainable));
  }
  return v;
}

// Collects gradients into a model-shaped container (weights hold dL/dw).
inline ComnetModel gradients(Tape const &t, ModelVars const &v, ComnetModel const &shape)
{
  ComnetModel g = shape;
  NCBranch *branches[2] = {&g.nc.real, &g.nc.imag};
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t l = 0; l < nc_layers; ++l) {
      branches[b]->layers[l].weight = t.grad(v.branches[b][2 * l]);
      branches[b]->layers[l].bias = t.grad(v.branches[b][2 * l + 1]);
    }
  }
  for (std::size_t p = 0; p < v.gammas.size(); ++p) {
    g.gammas[p] = t.grad(v.gammas[p])[0];
    g.etas[p] = t.grad(v.etas[p])[0];
  }
  return g;
}

inline Var nc_branch(Tape &t, Var x, std::array<Var, 2 * nc_layers> const &layers, Precision p)
{
  Var cur = x;
  for (std::size_t l = 0; l < nc_layers; ++l) {
    cur = conv2d(t, cur, layers[2 * l], layers[2 * l + 1], p);
    if (l + 1 < nc_layers) {
      cur = relu(t, cur);
    }
  }
  return add(t, x, cur);
}

inline Var nc_forward(Tape &t, Var img, ModelVars const &v, Precision p)
{
  Var const re = nc_branch(t, real_part(t, img), v.branches[0], p);
  Var const im = nc_branch(t, imag_part(t, img), v.branches[1], p);
  return make_complex(t, re, im);
}

// Per-slice operators and data the cascade closes over.
struct SliceRefs
{
  MultiCoilKspace const *y = nullptr;
  SamplingMask const *mask = nullptr;
  CoilSensitivities const *sens = nullptr;
  SpiritOperator const *spirit = nullptr; // unused in Dnn mode
};

struct TapedOutput
{
  Var kspace;
  Var image;
};

// Taped mirror of comnet::comnet_forward (same operator order).
inline TapedOutput comnet_forward(Tape &t, Var x0, SliceRefs const &s, ModelVars const &v, ComnetModel const &m,
                                  Precision p)
{
  auto to_k = [&](Var img) { return fft2c(t, coil_project(t, img, s.sens)); };
  auto to_img = [&](Var k) { return coil_combine(t, ifft2c(t, k), s.sens); };
  auto dc = [&](Var k) { return dc_project(t, k, s.y, s.mask, m.dc); };
  if (m.mode == ReconMode::Comnet && s.spirit == nullptr) {
    throw InvalidArgument("ad::comnet_forward: COMNET mode needs a SPIRiT operator");
  }

  Var state = dc(to_k(x0));
  for (Index stage = 0; stage < m.stages(); ++stage) {
    auto const ps = static_cast<std::size_t>(stage);
    Var const x = to_img(state);
    Var fused = scale(t, to_img(dc(to_k(nc_forward(t, x, v, p)))), v.gammas[ps]);
    if (m.mode == ReconMode::Comnet) {
      Var k = state;
      for (Index i = 0; i < m.cc_projections; ++i) {
        k = dc(spirit_apply(t, k, s.spirit));
      }
      fused = add(t, fused, scale(t, to_img(dc(k)), v.etas[ps]));
    }
    state = dc(to_k(fused));
  }
  return {state, to_img(state)};
}

} // namespace comnet::ad
