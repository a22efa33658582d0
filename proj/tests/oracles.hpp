#pragma once

// Synthetic data with a known SPIRiT kernel, shared by the calibration and
// recon tests and by the acceptance binary.

#include <comnet/comnet.hpp>

namespace oracles {

using namespace comnet;

inline Cx draw(SplitMix64 &rng) { return {rng.normal(), rng.normal()}; }

// Random kernel with structurally zero self-center taps.
inline SpiritKernel random_kernel(Index nc, Index kh, Index kw, std::uint64_t seed, double scale = 0.2)
{
  SplitMix64 rng(seed);
  SpiritKernel g(nc, kh, kw);
  for (Index co = 0; co < nc; ++co) {
    for (Index ci = 0; ci < nc; ++ci) {
      for (Index dy = 0; dy < kh; ++dy) {
        for (Index dx = 0; dx < kw; ++dx) {
          g(co, ci, dy, dx) = scale * draw(rng);
        }
      }
    }
  }
  g.clear_self_taps();
  return g;
}

// Calibration block in which output coil `c` is exactly g0's row c applied to
// the other coils (row c's self-coil taps are dropped from g0 beforehand).
// Every window lying fully inside the block satisfies the row-c relation,
// so a tikhonov = 0 fit must return that row.
struct RowOracle
{
  MultiCoilKspace acs;
  SpiritKernel truth; // row c only is meaningful
};

inline RowOracle row_oracle(SpiritKernel g0, Index c, Index ny, Index nx, std::uint64_t seed)
{
  Index const nc = g0.coils();
  for (Index dy = 0; dy < g0.kh(); ++dy) {
    for (Index dx = 0; dx < g0.kw(); ++dx) {
      g0(c, c, dy, dx) = Cx{0.0, 0.0};
    }
  }
  SpiritKernel only_row(nc, g0.kh(), g0.kw());
  for (Index ci = 0; ci < nc; ++ci) {
    for (Index dy = 0; dy < g0.kh(); ++dy) {
      for (Index dx = 0; dx < g0.kw(); ++dx) {
        only_row(c, ci, dy, dx) = g0(c, ci, dy, dx);
      }
    }
  }
  SplitMix64 rng(seed);
  MultiCoilKspace acs(nc, ny, nx);
  for (Cx &z : acs.flat()) {
    z = draw(rng);
  }
  acs.coil(c).setZero();
  MultiCoilKspace const synth = apply_kernel_direct(only_row, acs);
  acs.coil(c) = synth.coil(c);
  return {acs, only_row};
}

// Fully sampled k-space k with G k = k exactly under circular application,
// built as a chain: coil nc-1 is random, coil c = H_c (*) coil c+1. The last
// coil's row inverts the chain link H_{nc-2} through its center tap, so no
// self-center tap is needed.
struct ChainOracle
{
  MultiCoilKspace kspace;
  SpiritKernel kernel;
};

inline ChainOracle chain_oracle(Index nc, Index ny, Index nx, Index kh, Index kw, std::uint64_t seed)
{
  SplitMix64 rng(seed);
  SpiritKernel g(nc, kh, kw);
  Index const cy = kh / 2;
  Index const cx = kw / 2;
  std::vector<std::vector<Cx>> links(static_cast<std::size_t>(nc - 1));
  for (auto &h : links) {
    h.resize(static_cast<std::size_t>(kh * kw));
    for (Cx &w : h) {
      w = 0.1 * draw(rng);
    }
    h[static_cast<std::size_t>(cy * kw + cx)] = Cx{1.0, 0.0} + 0.1 * draw(rng);
  }
  MultiCoilKspace k(nc, ny, nx);
  for (Index i = 0; i < k.plane_size(); ++i) {
    k.coil(nc - 1).data()[i] = draw(rng);
  }
  for (Index c = nc - 2; c >= 0; --c) {
    SpiritKernel step(nc, kh, kw);
    for (Index t = 0; t < kh * kw; ++t) {
      Cx const w = links[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)];
      g(c, c + 1, t / kw, t % kw) = w;
      step(c, c + 1, t / kw, t % kw) = w;
    }
    k.coil(c) = apply_kernel_direct(step, k).coil(c);
  }
  auto const &last = links[static_cast<std::size_t>(nc - 2)];
  Cx const h0 = last[static_cast<std::size_t>(cy * kw + cx)];
  g(nc - 1, nc - 2, cy, cx) = 1.0 / h0;
  for (Index t = 0; t < kh * kw; ++t) {
    if (t != cy * kw + cx) {
      g(nc - 1, nc - 1, t / kw, t % kw) = -last[static_cast<std::size_t>(t)] / h0;
    }
  }
  return {k, g};
}

} // namespace oracles
