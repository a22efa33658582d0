#pragma once

#include "../calibration/acs.hpp"
#include "../calibration/espirit.hpp"
#include "../calibration/spirit.hpp"
#include "../data/zero_filled.hpp"
#include "../recon/blocks.hpp"

#include <memory>
#include <string>

namespace comnet {

struct CalibrationOptions
{
  Index spirit_kh = 5;
  Index spirit_kw = 5;
  double tikhonov = 1e-2;
  EspiritOptions espirit;
};

// One retrospectively undersampled slice with everything the reconstructors
// need: measurements, calibrated operators, and the fully sampled target
// combined with the same estimated maps.
struct PreparedSlice
{
  std::string id;
  MultiCoilKspace y; // mask * full k-space
  SamplingMask mask;
  CoilSensitivities sens;
  SpiritKernel kernel;
  std::shared_ptr<SpiritOperator const> spirit;
  ComplexImage target; // A* F^-1 (full k-space)
  ComplexImage x0;     // zero-filled
};

inline PreparedSlice prepare_slice(MultiCoilKspace const &full, SamplingMask const &mask,
                                   CalibrationOptions const &opt = {}, std::string id = {})
{
  require_mask_shape(full.rows(), full.cols(), mask, "prepare_slice");
  PreparedSlice s;
  s.id = std::move(id);
  s.mask = mask;
  s.y = apply_mask(full, mask);
  MultiCoilKspace const acs = extract_acs(s.y, mask);
  s.sens = estimate_sensitivities(acs, full.rows(), full.cols(), opt.espirit);
  s.kernel = fit_spirit_kernel(acs, opt.spirit_kh, opt.spirit_kw, opt.tikhonov);
  s.spirit = std::make_shared<SpiritOperator const>(s.kernel, full.rows(), full.cols());
  s.target = to_image(full, s.sens);
  s.x0 = to_image(s.y, s.sens);
  return s;
}

} // namespace comnet
