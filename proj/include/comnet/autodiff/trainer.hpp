#pragma once

#include "../core/random.hpp"
#include "../pipeline/slice.hpp"
#include "adam.hpp"
#include "graph.hpp"
#include "loss.hpp"

#include <functional>
#include <numeric>

namespace comnet {

struct TrainConfig
{
  ReconMode mode = ReconMode::Comnet;
  Index epochs = 200;
  AdamOptions adam;
  LossWeights loss;
  std::uint64_t seed = 0;
  Index stages = default_stages;
  Index channels = default_nc_channels;
  Index cc_projections = default_cc_projections;
  DCConfig dc = DCConfig::hard_mode();
  Precision precision = Precision::Float;
  // Called after every epoch with (epoch, mean loss).
  std::function<void(Index, double)> on_epoch;

  void validate() const
  {
    if (epochs < 1) {
      throw InvalidArgument("TrainConfig: epochs must be >= 1");
    }
    if (loss.l1 < 0.0 || loss.l2 < 0.0 || (loss.l1 == 0.0 && loss.l2 == 0.0)) {
      throw InvalidArgument("TrainConfig: loss weights must be nonnegative and not both zero");
    }
    if (!(adam.lr > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
        !(adam.eps >= 0.0)) {
      throw InvalidArgument("TrainConfig: invalid Adam hyperparameters");
    }
  }
};

struct TrainResult
{
  ComnetModel model;
  std::vector<double> loss_trace; // mean training loss per epoch
};

class TrainingDiverged : public NumericFailure
{
public:
  TrainingDiverged(std::string const &what, std::vector<double> trace)
    : NumericFailure(what)
    , trace_(std::move(trace))
  {
  }
  std::vector<double> const &trace() const { return trace_; }

private:
  std::vector<double> trace_;
};

// One forward/backward pass on a slice; returns the loss and writes the
// gradients.
inline double loss_and_gradient(ComnetModel const &model, PreparedSlice const &s, LossWeights const &w,
                                Precision precision, ComnetModel &grad)
{
  ad::Tape tape;
  ad::ModelVars const vars = ad::bind_model(tape, model);
  ad::Var const x0 = ad::image_constant(tape, s.x0);
  ad::SliceRefs const refs{&s.y, &s.mask, &s.sens, s.spirit.get()};
  ad::TapedOutput const out = ad::comnet_forward(tape, x0, refs, vars, model, precision);
  ad::Var const l = ad::l1l2_loss(tape, out.image, &s.target, w.l1, w.l2);
  tape.backward(l);
  grad = ad::gradients(tape, vars, model);
  return tape.value(l)[0];
}

// Few-shot training, batch size 1. Each epoch visits the slices in an order
// shuffled by SplitMix64(derive_seed(seed, 1000 + epoch)); NC weights and
// all gamma_p (and eta_p in COMNET mode) are updated jointly by Adam.
inline TrainResult train_few_shot(std::vector<PreparedSlice> const &slices, TrainConfig const &cfg)
{
  cfg.validate();
  if (slices.empty()) {
    throw InvalidArgument("train_few_shot: need at least one training slice");
  }
  TrainResult result;
  ComnetModel &model = result.model;
  model = init_model(cfg.mode, cfg.stages, cfg.seed, cfg.channels, cfg.dc);
  model.cc_projections = cfg.cc_projections;

  std::vector<AdamState> states;
  model.nc.for_each_tensor([&](std::vector<double> const &t) { states.emplace_back(t.size()); });
  AdamState gamma_state(model.gammas.size());
  AdamState eta_state(model.etas.size());

  std::vector<std::size_t> order(slices.size());
  for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double total = 0.0;
    for (std::size_t idx : order) {
      ComnetModel grad;
      double l = 0.0;
      try {
        l = loss_and_gradient(model, slices[idx], cfg.loss, cfg.precision, grad);
      } catch (InvalidInput const &) {
        // slices were checked on preparation; NaN here comes from the weights
        l = std::numeric_limits<double>::quiet_NaN();
      } catch (NumericFailure const &) {
        l = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(l) || l > 1e6) {
        result.loss_trace.push_back(l);
        throw TrainingDiverged("train_few_shot: loss diverged (" + std::to_string(l) + ") in epoch " +
                                 std::to_string(epoch),
                               result.loss_trace);
      }
      total += l;
      try {
        std::size_t k = 0;
        std::vector<std::vector<double> const *> gts;
        grad.nc.for_each_tensor([&](std::vector<double> const &t) { gts.push_back(&t); });
        model.nc.for_each_tensor([&](std::vector<double> &t) {
          adam_step(t, *gts[k], states[k], cfg.adam);
          ++k;
        });
        adam_step(model.gammas, grad.gammas, gamma_state, cfg.adam);
        if (cfg.mode == ReconMode::Comnet) {
          adam_step(model.etas, grad.etas, eta_state, cfg.adam);
        }
      } catch (NumericFailure const &e) {
        throw TrainingDiverged(std::string(e.what()) + " in epoch " + std::to_string(epoch), result.loss_trace);
      }
    }
    double const mean = total / static_cast<double>(slices.size());
    result.loss_trace.push_back(mean);
    if (cfg.on_epoch) {
      cfg.on_epoch(epoch, mean);
    }
  }
  return result;
}

} // namespace comnet
