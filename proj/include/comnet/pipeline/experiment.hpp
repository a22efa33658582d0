#pragma once

#include "../autodiff/trainer.hpp"
#include "../data/container.hpp"
#include "../data/phantom.hpp"
#include "../metrics/evaluate.hpp"
#include "../recon/comnet.hpp"
#include "../recon/l1spirit.hpp"
#include "slice.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>

namespace comnet {

enum class Method
{
  Zf,
  L1Spirit,
  Dnn,
  Comnet
};

inline std::string to_string(Method m)
{
  switch (m) {
  case Method::Zf:
    return "zf";
  case Method::L1Spirit:
    return "l1spirit";
  case Method::Dnn:
    return "dnn";
  case Method::Comnet:
    return "comnet";
  }
  return "?";
}

inline Method parse_method(std::string const &s)
{
  for (Method m : {Method::Zf, Method::L1Spirit, Method::Dnn, Method::Comnet}) {
    if (s == to_string(m)) {
      return m;
    }
  }
  throw InvalidArgument("unknown method '" + s + "' (expected zf, l1spirit, dnn or comnet)");
}

inline std::vector<double> default_tau_grid() { return {0.0, 0.003, 0.01, 0.02, 0.04}; }

// Threshold with the best mean PSNR over `slices`; ties keep the smaller tau.
inline double select_tau(std::vector<PreparedSlice> const &slices, L1SpiritOptions base,
                         std::vector<double> const &grid = default_tau_grid())
{
  if (slices.empty() || grid.empty()) {
    throw InvalidArgument("select_tau: need slices and a nonempty grid");
  }
  double best_tau = grid.front();
  double best = -std::numeric_limits<double>::infinity();
  for (double tau : grid) {
    base.tau = tau;
    double total = 0.0;
    for (PreparedSlice const &s : slices) {
      total += psnr(l1spirit_recon(s.y, s.mask, *s.spirit, s.sens, base).image, s.target);
    }
    if (total > best) {
      best = total;
      best_tau = tau;
    }
  }
  return best_tau;
}

inline Reconstruction reconstruct(Method method, PreparedSlice const &s, ComnetModel const *model,
                                  L1SpiritOptions const &l1, Precision precision = Precision::Double)
{
  switch (method) {
  case Method::Zf:
    return {s.y, s.x0};
  case Method::L1Spirit:
    return l1spirit_recon(s.y, s.mask, *s.spirit, s.sens, l1);
  case Method::Dnn:
  case Method::Comnet:
    if (model == nullptr) {
      throw InvalidArgument(to_string(method) + " reconstruction needs a trained model");
    }
    if (method == Method::Comnet) {
      if (model->mode != ReconMode::Comnet) {
        throw InvalidArgument("model was trained in dnn mode; it cannot run the comnet cascade");
      }
      return comnet_forward(s.x0, s.y, s.mask, s.sens, s.spirit.get(), *model, precision);
    }
    return dnn_recon(s.x0, s.y, s.mask, s.sens, *model, precision);
  }
  throw InternalError("reconstruct: unhandled method");
}

// Case i of a cohort uses phantom seed `seed + i`.
inline std::vector<PhantomCase> phantom_cohort(Index nc, Index ny, Index nx, Index count, std::uint64_t seed)
{
  if (count < 1) {
    throw InvalidArgument("phantom cohort: count must be >= 1");
  }
  std::vector<PhantomCase> out;
  for (Index i = 0; i < count; ++i) {
    out.push_back(generate_phantom(nc, ny, nx, seed + static_cast<std::uint64_t>(i)));
  }
  return out;
}

inline std::vector<PreparedSlice> prepare_cohort(std::vector<PhantomCase> const &cases, SamplingMask const &mask,
                                                 CalibrationOptions const &opt, std::string const &prefix)
{
  std::vector<PreparedSlice> out;
  for (PhantomCase const &c : cases) {
    out.push_back(prepare_slice(c.kspace, mask, opt, prefix + std::to_string(c.seed)));
  }
  return out;
}

// A data directory holds one k-space file per case (*.cks); coil-map files
// (*.sens.cks) are skipped. Cases are returned in file-name order.
inline std::vector<std::filesystem::path> list_cases(std::filesystem::path const &dir)
{
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw InvalidArgument("data directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> out;
  for (auto const &e : std::filesystem::directory_iterator(dir)) {
    std::string const name = e.path().filename().string();
    auto ends_with = [&](std::string const &suffix) {
      return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (e.is_regular_file() && ends_with(".cks") && !ends_with(".sens.cks")) {
      out.push_back(e.path());
    }
  }
  if (out.empty()) {
    throw InvalidArgument("data directory '" + dir.string() + "' contains no .cks cases");
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<PreparedSlice> load_cases(std::filesystem::path const &dir, SamplingMask const &mask,
                                             CalibrationOptions const &opt)
{
  std::vector<PreparedSlice> out;
  for (auto const &p : list_cases(dir)) {
    out.push_back(prepare_slice(io::load_kspace(p), mask, opt, p.stem().string()));
  }
  return out;
}

// ---- sample-count sweep ---------------------------------------------------

struct SweepRow
{
  std::string method;
  Index samples = 0;
  Summary psnr;
  Summary ssim;
  double train_seconds = 0.0;
};

struct SweepOptions
{
  std::vector<Index> samples;
  std::vector<ReconMode> modes{ReconMode::Comnet, ReconMode::Dnn};
  TrainConfig train;
  L1SpiritOptions l1;
  std::vector<double> tau_grid = default_tau_grid();
  bool include_l1spirit = true;
  // Called after each cell finishes.
  std::function<void(SweepRow const &)> on_row;
};

using ModelCache = std::map<std::pair<ReconMode, Index>, ComnetModel>;

// For each sample count n the first n slices of `pool` train one model per
// mode; everything is scored on `test`. L1-SPIRiT rows use the tau selected
// on the same n training slices. `cache` (optional) supplies and receives
// trained models keyed by (mode, n).
inline std::vector<SweepRow> run_sweep(std::vector<PreparedSlice> const &pool, std::vector<PreparedSlice> const &test,
                                       SweepOptions const &opt, ModelCache *cache = nullptr)
{
  if (opt.samples.empty() || test.empty()) {
    throw InvalidArgument("sweep: need at least one sample count and one test slice");
  }
  std::vector<SweepRow> rows;
  auto emit = [&](SweepRow r) {
    if (opt.on_row) {
      opt.on_row(r);
    }
    rows.push_back(std::move(r));
  };
  for (Index n : opt.samples) {
    if (n < 1 || n > static_cast<Index>(pool.size())) {
      throw InvalidArgument("sweep: sample count " + std::to_string(n) + " outside 1.." + std::to_string(pool.size()));
    }
    std::vector<PreparedSlice> const train(pool.begin(), pool.begin() + n);
    if (opt.include_l1spirit) {
      L1SpiritOptions l1 = opt.l1;
      l1.tau = select_tau(train, l1, opt.tau_grid);
      MetricReport const r =
        evaluate(test, "l1spirit", [&](PreparedSlice const &s) { return reconstruct(Method::L1Spirit, s, nullptr, l1).image; });
      emit({"l1spirit", n, r.psnr, r.ssim, 0.0});
    }
    for (ReconMode mode : opt.modes) {
      ComnetModel model;
      double seconds = 0.0;
      auto const key = std::make_pair(mode, n);
      if (cache != nullptr && cache->count(key) != 0) {
        model = cache->at(key);
      } else {
        TrainConfig cfg = opt.train;
        cfg.mode = mode;
        auto const t0 = std::chrono::steady_clock::now();
        model = train_few_shot(train, cfg).model;
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cache != nullptr) {
          (*cache)[key] = model;
        }
      }
      Method const m = mode == ReconMode::Comnet ? Method::Comnet : Method::Dnn;
      MetricReport const r =
        evaluate(test, to_string(m), [&](PreparedSlice const &s) { return reconstruct(m, s, &model, opt.l1).image; });
      emit({to_string(m), n, r.psnr, r.ssim, seconds});
    }
  }
  return rows;
}

inline constexpr char const *sweep_csv_header = "method,samples,psnr_db,psnr_sem,ssim,ssim_sem";

} // namespace comnet
