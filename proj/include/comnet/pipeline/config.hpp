#pragma once

#include "experiment.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <set>

namespace comnet {

inline constexpr int config_schema_version = 1;

// Everything a CLI run can be parameterized with. Loaded from JSON and then
// overridden by command-line flags.
struct ExperimentConfig
{
  struct Phantom
  {
    Index coils = 4;
    Index ny = 64;
    Index nx = 64;
    Index count = 10;
    std::uint64_t seed = 1;
  } phantom;

  struct Mask
  {
    double accel = 4.0;
    Index acs_h = 16;
    Index acs_w = 16;
    std::uint64_t seed = 1;
  } mask;

  CalibrationOptions calibration;
  TrainConfig train;

  struct L1
  {
    Index iterations = 30;
    std::optional<double> tau; // unset: chosen on the training slices
    std::vector<double> tau_grid = default_tau_grid();
    int levels = 3;
  } l1spirit;

  struct Sweep
  {
    std::vector<Index> samples{2, 4, 6, 12};
    std::vector<ReconMode> modes{ReconMode::Comnet, ReconMode::Dnn};
    Index test_count = 4;
    std::uint64_t train_seed = 1000;
    std::uint64_t test_seed = 1500;
  } sweep;

  struct Paths
  {
    std::string data;
    std::string test_data;
    std::string mask;
    std::string model;
  } paths;

  L1SpiritOptions l1_options() const
  {
    L1SpiritOptions o;
    o.iterations = l1spirit.iterations;
    o.tau = l1spirit.tau.value_or(0.0);
    o.levels = l1spirit.levels;
    o.dc = train.dc;
    return o;
  }
};

namespace detail {

using Json = nlohmann::json;

inline void only_keys(Json const &obj, std::string const &where, std::set<std::string> const &allowed)
{
  if (!obj.is_object()) {
    throw InvalidArgument("config: '" + where + "' must be an object");
  }
  for (auto const &[k, v] : obj.items()) {
    if (allowed.count(k) == 0) {
      throw InvalidArgument("config: unknown key '" + where + "." + k + "'");
    }
  }
}

template <typename T>
void read(Json const &obj, char const *key, T &out, std::string const &where)
{
  if (!obj.contains(key)) {
    return;
  }
  try {
    out = obj.at(key).get<T>();
  } catch (Json::exception const &) {
    throw InvalidArgument("config: '" + where + "." + key + "' has the wrong type");
  }
}

inline void read_pair(Json const &obj, char const *key, Index &a, Index &b, std::string const &where)
{
  if (!obj.contains(key)) {
    return;
  }
  std::vector<Index> v;
  read(obj, key, v, where);
  if (v.size() != 2) {
    throw InvalidArgument("config: '" + where + "." + key + "' must have two entries");
  }
  a = v[0];
  b = v[1];
}

inline void require(bool ok, std::string const &msg)
{
  if (!ok) {
    throw InvalidArgument("config: " + msg);
  }
}

} // namespace detail

// Range checks shared by config files and flag overrides.
inline void validate(ExperimentConfig const &c)
{
  using detail::require;
  require(c.phantom.coils >= 2, "phantom.coils must be >= 2");
  require(c.phantom.ny >= 8 && c.phantom.nx >= 8, "phantom.size must be at least 8x8");
  require(c.phantom.count >= 1, "phantom.count must be >= 1");
  require(c.mask.accel >= 1.0, "mask.accel must be >= 1");
  require(c.mask.acs_h >= 0 && c.mask.acs_w >= 0, "mask.acs must be nonnegative");
  require(c.calibration.spirit_kh >= 1 && c.calibration.spirit_kh % 2 == 1 && c.calibration.spirit_kw >= 1 &&
            c.calibration.spirit_kw % 2 == 1,
          "calibration.spirit_kernel must be odd");
  require(c.calibration.tikhonov >= 0.0, "calibration.tikhonov must be >= 0");
  require(c.calibration.espirit.kernel_h >= 1 && c.calibration.espirit.kernel_w >= 1,
          "calibration.espirit_kernel must be positive");
  require(c.calibration.espirit.sv_threshold > 0.0 && c.calibration.espirit.sv_threshold < 1.0,
          "calibration.sv_threshold must be in (0, 1)");
  require(c.calibration.espirit.eig_threshold > 0.0 && c.calibration.espirit.eig_threshold < 1.0,
          "calibration.eig_threshold must be in (0, 1)");
  require(c.train.stages >= 1 && c.train.stages <= 10, "train.stages must be in 1..10");
  require(c.train.channels >= 1, "train.channels must be >= 1");
  require(c.train.cc_projections >= 0, "train.cc_projections must be >= 0");
  try {
    c.train.validate();
  } catch (InvalidArgument const &e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  require(c.l1spirit.iterations >= 0, "l1spirit.iterations must be >= 0");
  require(!c.l1spirit.tau || *c.l1spirit.tau >= 0.0, "l1spirit.tau must be >= 0");
  require(!c.l1spirit.tau_grid.empty(), "l1spirit.tau_grid must not be empty");
  for (double t : c.l1spirit.tau_grid) {
    require(t >= 0.0, "l1spirit.tau_grid entries must be >= 0");
  }
  require(c.l1spirit.levels >= 1, "l1spirit.levels must be >= 1");
  require(!c.sweep.samples.empty(), "sweep.samples must not be empty");
  for (Index n : c.sweep.samples) {
    require(n >= 1, "sweep.samples entries must be >= 1");
  }
  require(!c.sweep.modes.empty(), "sweep.modes must not be empty");
  require(c.sweep.test_count >= 1, "sweep.test_count must be >= 1");
}

inline ExperimentConfig parse_config(nlohmann::json const &j)
{
  using detail::only_keys;
  using detail::read;
  using detail::read_pair;
  ExperimentConfig c;
  only_keys(j, "config",
            {"schema_version", "phantom", "mask", "calibration", "train", "l1spirit", "sweep", "paths"});
  if (!j.contains("schema_version")) {
    throw InvalidArgument("config: missing schema_version");
  }
  int version = 0;
  read(j, "schema_version", version, "config");
  if (version != config_schema_version) {
    throw InvalidArgument("config: schema_version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(config_schema_version) + ")");
  }
  if (j.contains("phantom")) {
    auto const &p = j["phantom"];
    only_keys(p, "phantom", {"coils", "size", "count", "seed"});
    read(p, "coils", c.phantom.coils, "phantom");
    read_pair(p, "size", c.phantom.ny, c.phantom.nx, "phantom");
    read(p, "count", c.phantom.count, "phantom");
    read(p, "seed", c.phantom.seed, "phantom");
  }
  if (j.contains("mask")) {
    auto const &m = j["mask"];
    only_keys(m, "mask", {"accel", "acs", "seed"});
    read(m, "accel", c.mask.accel, "mask");
    read_pair(m, "acs", c.mask.acs_h, c.mask.acs_w, "mask");
    read(m, "seed", c.mask.seed, "mask");
  }
  if (j.contains("calibration")) {
    auto const &m = j["calibration"];
    only_keys(m, "calibration", {"spirit_kernel", "tikhonov", "espirit_kernel", "sv_threshold", "eig_threshold"});
    read_pair(m, "spirit_kernel", c.calibration.spirit_kh, c.calibration.spirit_kw, "calibration");
    read(m, "tikhonov", c.calibration.tikhonov, "calibration");
    read_pair(m, "espirit_kernel", c.calibration.espirit.kernel_h, c.calibration.espirit.kernel_w, "calibration");
    read(m, "sv_threshold", c.calibration.espirit.sv_threshold, "calibration");
    read(m, "eig_threshold", c.calibration.espirit.eig_threshold, "calibration");
  }
  if (j.contains("train")) {
    auto const &t = j["train"];
    only_keys(t, "train",
              {"mode", "stages", "epochs", "lr", "beta1", "beta2", "eps", "loss_l1", "loss_l2", "seed", "channels",
               "cc_projections", "precision", "dc_lambda"});
    std::string mode = to_string(c.train.mode);
    read(t, "mode", mode, "train");
    c.train.mode = parse_mode(mode);
    read(t, "stages", c.train.stages, "train");
    read(t, "epochs", c.train.epochs, "train");
    read(t, "lr", c.train.adam.lr, "train");
    read(t, "beta1", c.train.adam.beta1, "train");
    read(t, "beta2", c.train.adam.beta2, "train");
    read(t, "eps", c.train.adam.eps, "train");
    read(t, "loss_l1", c.train.loss.l1, "train");
    read(t, "loss_l2", c.train.loss.l2, "train");
    read(t, "seed", c.train.seed, "train");
    read(t, "channels", c.train.channels, "train");
    read(t, "cc_projections", c.train.cc_projections, "train");
    std::string precision = c.train.precision == Precision::Float ? "float" : "double";
    read(t, "precision", precision, "train");
    if (precision != "float" && precision != "double") {
      throw InvalidArgument("config: train.precision must be float or double");
    }
    c.train.precision = precision == "float" ? Precision::Float : Precision::Double;
    if (t.contains("dc_lambda") && !t["dc_lambda"].is_null()) {
      double lambda = 0.0;
      read(t, "dc_lambda", lambda, "train");
      c.train.dc = DCConfig::soft(lambda);
    }
  }
  if (j.contains("l1spirit")) {
    auto const &l = j["l1spirit"];
    only_keys(l, "l1spirit", {"iterations", "tau", "tau_grid", "levels"});
    read(l, "iterations", c.l1spirit.iterations, "l1spirit");
    if (l.contains("tau") && !l["tau"].is_null()) {
      double tau = 0.0;
      read(l, "tau", tau, "l1spirit");
      c.l1spirit.tau = tau;
    }
    read(l, "tau_grid", c.l1spirit.tau_grid, "l1spirit");
    read(l, "levels", c.l1spirit.levels, "l1spirit");
  }
  if (j.contains("sweep")) {
    auto const &s = j["sweep"];
    only_keys(s, "sweep", {"samples", "modes", "test_count", "train_seed", "test_seed"});
    read(s, "samples", c.sweep.samples, "sweep");
    if (s.contains("modes")) {
      std::vector<std::string> modes;
      read(s, "modes", modes, "sweep");
      c.sweep.modes.clear();
      for (auto const &m : modes) {
        c.sweep.modes.push_back(parse_mode(m));
      }
    }
    read(s, "test_count", c.sweep.test_count, "sweep");
    read(s, "train_seed", c.sweep.train_seed, "sweep");
    read(s, "test_seed", c.sweep.test_seed, "sweep");
  }
  if (j.contains("paths")) {
    auto const &p = j["paths"];
    only_keys(p, "paths", {"data", "test_data", "mask", "model"});
    read(p, "data", c.paths.data, "paths");
    read(p, "test_data", c.paths.test_data, "paths");
    read(p, "mask", c.paths.mask, "paths");
    read(p, "model", c.paths.model, "paths");
  }
  validate(c);
  return c;
}

inline nlohmann::json to_json(ExperimentConfig const &c)
{
  nlohmann::json j;
  j["schema_version"] = config_schema_version;
  j["phantom"] = {{"coils", c.phantom.coils},
                  {"size", {c.phantom.ny, c.phantom.nx}},
                  {"count", c.phantom.count},
                  {"seed", c.phantom.seed}};
  j["mask"] = {{"accel", c.mask.accel}, {"acs", {c.mask.acs_h, c.mask.acs_w}}, {"seed", c.mask.seed}};
  j["calibration"] = {{"spirit_kernel", {c.calibration.spirit_kh, c.calibration.spirit_kw}},
                      {"tikhonov", c.calibration.tikhonov},
                      {"espirit_kernel", {c.calibration.espirit.kernel_h, c.calibration.espirit.kernel_w}},
                      {"sv_threshold", c.calibration.espirit.sv_threshold},
                      {"eig_threshold", c.calibration.espirit.eig_threshold}};
  j["train"] = {{"mode", to_string(c.train.mode)},
                {"stages", c.train.stages},
                {"epochs", c.train.epochs},
                {"lr", c.train.adam.lr},
                {"beta1", c.train.adam.beta1},
                {"beta2", c.train.adam.beta2},
                {"eps", c.train.adam.eps},
                {"loss_l1", c.train.loss.l1},
                {"loss_l2", c.train.loss.l2},
                {"seed", c.train.seed},
                {"channels", c.train.channels},
                {"cc_projections", c.train.cc_projections},
                {"precision", c.train.precision == Precision::Float ? "float" : "double"},
                {"dc_lambda", c.train.dc.hard ? nlohmann::json(nullptr) : nlohmann::json(c.train.dc.lambda)}};
  j["l1spirit"] = {{"iterations", c.l1spirit.iterations},
                   {"tau", c.l1spirit.tau ? nlohmann::json(*c.l1spirit.tau) : nlohmann::json(nullptr)},
                   {"tau_grid", c.l1spirit.tau_grid},
                   {"levels", c.l1spirit.levels}};
  std::vector<std::string> modes;
  for (ReconMode m : c.sweep.modes) {
    modes.push_back(to_string(m));
  }
  j["sweep"] = {{"samples", c.sweep.samples},
                {"modes", modes},
                {"test_count", c.sweep.test_count},
                {"train_seed", c.sweep.train_seed},
                {"test_seed", c.sweep.test_seed}};
  j["paths"] = {{"data", c.paths.data},
                {"test_data", c.paths.test_data},
                {"mask", c.paths.mask},
                {"model", c.paths.model}};
  return j;
}

inline ExperimentConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (nlohmann::json::exception const &e) {
    throw InvalidArgument("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

} // namespace comnet
