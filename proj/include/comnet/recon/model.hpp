#pragma once

#include "dc.hpp"
#include "nc.hpp"

#include <string>
#include <vector>

namespace comnet {

enum class ReconMode
{
  Comnet,
  Dnn
};

inline std::string to_string(ReconMode m) { return m == ReconMode::Comnet ? "comnet" : "dnn"; }

inline ReconMode parse_mode(std::string const &s)
{
  if (s == "comnet") {
    return ReconMode::Comnet;
  }
  if (s == "dnn") {
    return ReconMode::Dnn;
  }
  throw InvalidArgument("unknown mode '" + s + "' (expected comnet or dnn)");
}

inline constexpr Index default_cc_projections = 5;
inline constexpr Index default_stages = 3;

// One set of NC weights shared by all stages; per-stage fusion weights.
struct ComnetModel
{
  ReconMode mode = ReconMode::Comnet;
  NCWeights nc;
  std::vector<double> gammas;
  std::vector<double> etas;
  DCConfig dc;
  Index cc_projections = default_cc_projections;

  Index stages() const { return static_cast<Index>(gammas.size()); }

  void validate() const
  {
    if (gammas.empty() || gammas.size() != etas.size()) {
      throw InvalidArgument("ComnetModel: need P >= 1 stages with one gamma and one eta each");
    }
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      if (!std::isfinite(gammas[i]) || !std::isfinite(etas[i])) {
        throw InvalidArgument("ComnetModel: non-finite fusion weight at stage " + std::to_string(i));
      }
    }
    if (cc_projections < 0) {
      throw InvalidArgument("ComnetModel: cc_projections must be >= 0");
    }
    nc.validate();
  }

  bool operator==(ComnetModel const &) const = default;
};

// He-uniform NC weights, gamma = eta = 0.5 at every stage.
inline ComnetModel init_model(ReconMode mode, Index stages, std::uint64_t seed, Index channels = default_nc_channels,
                              DCConfig dc = DCConfig::hard_mode())
{
  if (stages < 1 || stages > 10) {
    throw InvalidArgument("init_model: stages must be in [1, 10], got " + std::to_string(stages));
  }
  ComnetModel m;
  m.mode = mode;
  m.nc = NCWeights::he_uniform(channels, seed);
  m.gammas.assign(static_cast<std::size_t>(stages), 0.5);
  m.etas.assign(static_cast<std::size_t>(stages), 0.5);
  m.dc = dc;
  return m;
}

} // namespace comnet
