#pragma once

#include "blocks.hpp"
#include "model.hpp"

#include <optional>

namespace comnet {

namespace detail {

template <typename F>
auto with_stage(Index p, F &&f)
{
  auto const tag = [p](char const *what) { return "stage " + std::to_string(p) + ": " + what; };
  try {
    return f();
  } catch (NumericFailure const &e) {
    throw NumericFailure(tag(e.what()));
  } catch (InvalidArgument const &e) {
    throw InvalidArgument(tag(e.what()));
  }
}

} // namespace detail

// Unrolled cascade. The carried state is multi-coil k-space s_p, initialized
// as s_0 = DC(F A x0). Stage p computes
//
//   x        = A* F^-1 s_{p-1}
//   nc_term  = A* F^-1 DC(F A NC(x))
//   cc_term  = A* F^-1 DC(CC(s_{p-1}))        (CC = cc_projections x DC(G .))
//   s_p      = DC(F A (gamma_p nc_term + eta_p cc_term))
//
// and the result image is A* F^-1 s_P. In Dnn mode the CC path is skipped.
// `spirit` may be null only in Dnn mode.
inline Reconstruction comnet_forward(ComplexImage const &x0, MultiCoilKspace const &y, SamplingMask const &mask,
                                     CoilSensitivities const &sens, SpiritOperator const *spirit,
                                     ComnetModel const &model, Precision precision = Precision::Double)
{
  model.validate();
  detail::require_shape(y, sens, "comnet_forward");
  if (model.mode == ReconMode::Comnet && spirit == nullptr) {
    throw InvalidArgument("comnet_forward: COMNET mode needs a SPIRiT kernel");
  }
  MultiCoilKspace state = dc_project(to_kspace(x0, sens), y, mask, model.dc);
  for (Index p = 0; p < model.stages(); ++p) {
    state = detail::with_stage(p, [&] {
      ComplexImage const x = to_image(state, sens);
      ComplexImage const nc_img = nc_forward(x, model.nc, precision);
      ComplexImage fused =
        model.gammas[static_cast<std::size_t>(p)] * to_image(dc_project(to_kspace(nc_img, sens), y, mask, model.dc), sens);
      if (model.mode == ReconMode::Comnet) {
        MultiCoilKspace const cc = cc_block(state, *spirit, y, mask, model.dc, model.cc_projections);
        fused += model.etas[static_cast<std::size_t>(p)] * to_image(dc_project(cc, y, mask, model.dc), sens);
      }
      return dc_project(to_kspace(fused, sens), y, mask, model.dc);
    });
  }
  return {state, to_image(state, sens)};
}

inline Reconstruction comnet_forward(ComplexImage const &x0, MultiCoilKspace const &y, SamplingMask const &mask,
                                     CoilSensitivities const &sens, SpiritKernel const &g, ComnetModel const &model,
                                     Precision precision = Precision::Double)
{
  SpiritOperator const op(g, y.rows(), y.cols());
  return comnet_forward(x0, y, mask, sens, &op, model, precision);
}

// The data-driven-only cascade: same recursion with eta forced to 0 and the
// CC path removed.
inline Reconstruction dnn_recon(ComplexImage const &x0, MultiCoilKspace const &y, SamplingMask const &mask,
                                CoilSensitivities const &sens, ComnetModel model,
                                Precision precision = Precision::Double)
{
  model.mode = ReconMode::Dnn;
  return comnet_forward(x0, y, mask, sens, nullptr, model, precision);
}

} // namespace comnet
