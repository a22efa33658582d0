#include "oracles.hpp"
#include "support.hpp"

using namespace comnet;
using namespace testing_support;

namespace {

struct Fixture
{
  PhantomCase pc;
  PreparedSlice s;
};

Fixture phantom_slice(Index n, Index nc, double accel, Index acs, std::uint64_t seed)
{
  Fixture f{generate_phantom(nc, n, n, seed), {}};
  f.s = prepare_slice(f.pc.kspace, generate_mask(n, n, accel, acs, acs, seed), {}, "p" + std::to_string(seed));
  return f;
}

ComnetModel zero_model(ReconMode mode, Index stages, Index channels = 4)
{
  ComnetModel m = init_model(mode, stages, 1, channels);
  m.nc = NCWeights::zeros(channels);
  return m;
}

} // namespace

// ---- data consistency --------------------------------------------------

TEST(Dc, HardReplacesSampledEntries)
{
  auto const k = random_coils(2, 12, 10, 1);
  auto const y0 = random_coils(2, 12, 10, 2);
  SamplingMask const m = generate_mask(12, 10, 2.0, 4, 4, 3);
  MultiCoilKspace const y = apply_mask(y0, m);
  MultiCoilKspace const out = dc_project(k, y, m, DCConfig::hard_mode());
  for (Index c = 0; c < 2; ++c) {
    for (Index i = 0; i < 120; ++i) {
      Cx const want = m.pattern.data()[i] ? y.coil(c).data()[i] : k.coil(c).data()[i];
      ASSERT_EQ(out.coil(c).data()[i], want);
    }
  }
  EXPECT_EQ(dc_violation(out, y, m), 0.0);
}

TEST(Dc, Idempotent)
{
  auto const k = random_coils(3, 16, 16, 4);
  SamplingMask const m = generate_mask(16, 16, 4.0, 4, 4, 5);
  MultiCoilKspace const y = apply_mask(random_coils(3, 16, 16, 6), m);
  MultiCoilKspace const once = dc_project(k, y, m, DCConfig::hard_mode());
  EXPECT_EQ(distance(dc_project(once, y, m, DCConfig::hard_mode()).flat(), once.flat()), 0.0);
}

TEST(Dc, SoftBlend)
{
  MultiCoilKspace k(1, 1, 1);
  MultiCoilKspace y(1, 1, 1);
  k.coil(0)(0, 0) = 1.0;
  y.coil(0)(0, 0) = 3.0;
  SamplingMask const m = full_mask(1, 1);
  EXPECT_NEAR(std::abs(dc_project(k, y, m, DCConfig::soft(1.0)).coil(0)(0, 0) - Cx{2.0, 0.0}), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(dc_project(k, y, m, DCConfig::soft(3.0)).coil(0)(0, 0) - Cx{2.5, 0.0}), 0.0, 1e-15);
}

TEST(Dc, InvalidInputs)
{
  EXPECT_THROW(DCConfig::soft(0.0), InvalidArgument);
  EXPECT_THROW(DCConfig::soft(-1.0), InvalidArgument);
  auto const k = random_coils(2, 8, 8, 1);
  EXPECT_THROW(dc_project(k, random_coils(2, 8, 7, 1), full_mask(8, 8), DCConfig::hard_mode()), InvalidArgument);
  EXPECT_THROW(dc_project(k, k, full_mask(8, 7), DCConfig::hard_mode()), InvalidArgument);
}

// ---- calibration-consistency block ------------------------------------

TEST(CcBlock, ZeroProjectionsIsIdentity)
{
  auto const k = random_coils(3, 12, 12, 1);
  SpiritKernel const g = oracles::random_kernel(3, 3, 3, 2);
  MultiCoilKspace const out = cc_block(k, g, k, generate_mask(12, 12, 2.0, 4, 4, 1), DCConfig::hard_mode(), 0);
  EXPECT_EQ(distance(out.flat(), k.flat()), 0.0);
}

TEST(CcBlock, ConsistentDataIsFixedPoint)
{
  auto const o = oracles::chain_oracle(4, 32, 32, 5, 5, 21);
  for (double accel : {1.0, 4.0}) {
    SamplingMask const m = accel == 1.0 ? full_mask(32, 32) : generate_mask(32, 32, accel, 8, 8, 2);
    MultiCoilKspace const y = apply_mask(o.kspace, m);
    MultiCoilKspace const out = cc_block(o.kspace, o.kernel, y, m, DCConfig::hard_mode(), 5);
    EXPECT_LT(rel_error(out, o.kspace), 1e-8) << "R=" << accel;
  }
}

TEST(CcBlock, ImprovesOnZeroFilled)
{
  auto const f = phantom_slice(64, 4, 4.0, 16, 1);
  ComplexImage const zf = to_image(f.s.y, f.s.sens);
  MultiCoilKspace const k = cc_block(f.s.y, *f.s.spirit, f.s.y, f.s.mask, DCConfig::hard_mode(), 30);
  double const p0 = psnr(zf, f.s.target);
  double const p1 = psnr(to_image(k, f.s.sens), f.s.target);
  RecordProperty("zf_psnr", std::to_string(p0));
  RecordProperty("cc_psnr", std::to_string(p1));
  EXPECT_GT(p1, p0 + 1.0);
  EXPECT_LT(dc_violation(k, f.s.y, f.s.mask), 1e-12);
}

TEST(CcBlock, RejectsCoilMismatch)
{
  auto const k = random_coils(3, 8, 8, 1);
  SpiritKernel const g = oracles::random_kernel(2, 3, 3, 2);
  EXPECT_THROW(cc_block(k, g, k, full_mask(8, 8), DCConfig::hard_mode()), InvalidArgument);
}

// ---- wavelet ------------------------------------------------------------

TEST(Wavelet, PerfectReconstruction)
{
  for (int levels : {1, 2, 3}) {
    ComplexImage const x = random_image(32, 24, static_cast<std::uint64_t>(levels));
    ComplexImage const w = dwt2(x, levels);
    EXPECT_LT(rel_error(idwt2(w, levels), x), 1e-12);
    EXPECT_NEAR(norm2(as_span(w)) / norm2(as_span(x)), 1.0, 1e-12);
  }
}

TEST(Wavelet, ConstantImageHasOnlyCoarseEnergy)
{
  ComplexImage const x = ComplexImage::Constant(16, 16, Cx{2.0, -1.0});
  ComplexImage const w = dwt2(x, 3);
  double detail = 0.0;
  for (Index y = 0; y < 16; ++y) {
    for (Index xx = 0; xx < 16; ++xx) {
      if (y >= 2 || xx >= 2) {
        detail = std::max(detail, std::abs(w(y, xx)));
      }
    }
  }
  EXPECT_LT(detail, 1e-13);
  EXPECT_NEAR(std::abs(w(0, 0) - Cx{2.0, -1.0} * 8.0), 0.0, 1e-12);
}

TEST(Wavelet, Adjoint)
{
  ComplexImage const a = random_image(16, 32, 1);
  ComplexImage const b = random_image(16, 32, 2);
  Cx const lhs = vdot(as_span(dwt2(a, 2)), as_span(b));
  Cx const rhs = vdot(as_span(a), as_span(idwt2(b, 2)));
  EXPECT_LT(std::abs(lhs - rhs) / std::abs(lhs), 1e-12);
}

TEST(Wavelet, IndivisibleShapeRejected)
{
  EXPECT_THROW(dwt2(random_image(12, 16, 1), 3), InvalidArgument);
  EXPECT_THROW(dwt2(random_image(16, 16, 1), 0), InvalidArgument);
}

TEST(Wavelet, GroupShrinkZeroTauKeepsData)
{
  auto const img = random_coils<ImageDomain>(3, 20, 18, 1);
  EXPECT_LT(rel_error(wavelet_group_shrink(img, 0.0, 3), img), 1e-12);
}

TEST(Wavelet, GroupShrinkLargeTauKeepsOnlyCoarse)
{
  MultiCoilImage img(2, 16, 16);
  img.coil(0).setConstant(Cx{1.0, 0.0});
  img.coil(1) = random_image(16, 16, 3);
  MultiCoilImage const out = wavelet_group_shrink(img, 1e6, 2);
  // the coarse band is never thresholded
  ComplexImage const c0 = out.coil(0);
  EXPECT_LT(rel_error(c0, ComplexImage(img.coil(0))), 1e-12);
}

// ---- network branch -----------------------------------------------------

TEST(NcBranch, ZeroWeightsIsIdentity)
{
  ComplexImage const x = random_image(10, 12, 1);
  EXPECT_EQ(distance(as_span(nc_forward(x, NCWeights::zeros(8))), as_span(x)), 0.0);
}

TEST(NcBranch, PreservesShape)
{
  NCWeights const w = NCWeights::he_uniform(6, 2);
  for (auto [h, wd] : {std::pair<Index, Index>{7, 9}, {16, 16}, {1, 5}}) {
    ComplexImage const out = nc_forward(random_image(h, wd, 3), w);
    EXPECT_EQ(out.rows(), h);
    EXPECT_EQ(out.cols(), wd);
  }
}

TEST(NcBranch, TranslationEquivariantAwayFromBorder)
{
  NCWeights const w = NCWeights::he_uniform(6, 3);
  ComplexImage x = ComplexImage::Zero(32, 32);
  x.block(12, 12, 5, 5) = random_image(5, 5, 4);
  ComplexImage xs = ComplexImage::Zero(32, 32);
  xs.block(15, 13, 5, 5) = x.block(12, 12, 5, 5);
  ComplexImage const a = nc_forward(x, w);
  ComplexImage const b = nc_forward(xs, w);
  // zero input gives a bias-free zero response, so the comparison is global
  EXPECT_LT((a.block(4, 4, 20, 20) - b.block(7, 5, 20, 20)).abs().maxCoeff(), 1e-12);
}

TEST(NcBranch, FloatCloseToDouble)
{
  NCWeights const w = NCWeights::he_uniform(16, 4);
  ComplexImage const x = random_image(16, 16, 5);
  EXPECT_LT(rel_error(nc_forward(x, w, Precision::Float), nc_forward(x, w)), 1e-5);
}

// ---- cascade ------------------------------------------------------------

TEST(Cascade, MatchesComposedOperators)
{
  auto const f = phantom_slice(32, 4, 3.0, 12, 2);
  ComnetModel m = init_model(ReconMode::Comnet, 2, 7, 4);
  m.gammas = {0.7, 0.2};
  m.etas = {0.4, 0.9};
  m.cc_projections = 3;
  auto const &s = f.s;
  DCConfig const dc = m.dc;
  MultiCoilKspace state = dc_project(to_kspace(s.x0, s.sens), s.y, s.mask, dc);
  for (std::size_t p = 0; p < 2; ++p) {
    ComplexImage const x = to_image(state, s.sens);
    ComplexImage const nc = to_image(dc_project(to_kspace(nc_forward(x, m.nc), s.sens), s.y, s.mask, dc), s.sens);
    MultiCoilKspace cc = state;
    for (int i = 0; i < 3; ++i) {
      cc = dc_project(apply_kernel_direct(s.kernel, cc), s.y, s.mask, dc);
    }
    ComplexImage const fused = m.gammas[p] * nc + m.etas[p] * to_image(cc, s.sens);
    state = dc_project(to_kspace(fused, s.sens), s.y, s.mask, dc);
  }
  Reconstruction const r = comnet_forward(s.x0, s.y, s.mask, s.sens, s.spirit.get(), m);
  EXPECT_LT(rel_error(r.kspace, state), 1e-12);
  EXPECT_LT(rel_error(r.image, to_image(state, s.sens)), 1e-12);
}

TEST(Cascade, NcOnlyWithZeroWeightsOnFullMaskReturnsData)
{
  auto const f = phantom_slice(32, 4, 1.0, 12, 3);
  ComnetModel m = zero_model(ReconMode::Comnet, 1);
  m.gammas = {1.0};
  m.etas = {0.0};
  Reconstruction const r = comnet_forward(f.s.x0, f.s.y, f.s.mask, f.s.sens, f.s.spirit.get(), m);
  EXPECT_LT(rel_error(r.kspace, f.s.y), 1e-12);
  EXPECT_LT(rel_error(r.image, f.s.x0), 1e-12);
}

TEST(Cascade, CcOnlyMatchesCcBlockChain)
{
  auto const f = phantom_slice(32, 4, 3.0, 12, 4);
  ComnetModel m = zero_model(ReconMode::Comnet, 1);
  m.gammas = {0.0};
  m.etas = {1.0};
  auto const &s = f.s;
  MultiCoilKspace const s0 = dc_project(to_kspace(s.x0, s.sens), s.y, s.mask, m.dc);
  MultiCoilKspace const cc = cc_block(s0, *s.spirit, s.y, s.mask, m.dc, m.cc_projections);
  MultiCoilKspace const want = dc_project(to_kspace(to_image(cc, s.sens), s.sens), s.y, s.mask, m.dc);
  Reconstruction const r = comnet_forward(s.x0, s.y, s.mask, s.sens, s.spirit.get(), m);
  EXPECT_LT(rel_error(r.kspace, want), 1e-12);
}

TEST(Cascade, CcOnlyOnFullMaskIsIdentity)
{
  auto const f = phantom_slice(32, 4, 1.0, 12, 5);
  ComnetModel m = zero_model(ReconMode::Comnet, 2);
  m.gammas = {0.0, 0.0};
  m.etas = {1.0, 1.0};
  Reconstruction const r = comnet_forward(f.s.x0, f.s.y, f.s.mask, f.s.sens, f.s.spirit.get(), m);
  EXPECT_LT(rel_error(r.kspace, f.s.y), 1e-12);
}

TEST(Cascade, DnnEqualsComnetWithoutCcPath)
{
  auto const f = phantom_slice(32, 4, 4.0, 12, 6);
  ComnetModel m = init_model(ReconMode::Comnet, 2, 3, 4);
  m.etas = {0.0, 0.0};
  Reconstruction const a = comnet_forward(f.s.x0, f.s.y, f.s.mask, f.s.sens, f.s.spirit.get(), m);
  m.etas = {0.9, 0.1};
  Reconstruction const b = dnn_recon(f.s.x0, f.s.y, f.s.mask, f.s.sens, m);
  EXPECT_LT(rel_error(b.kspace, a.kspace), 1e-14);
}

TEST(Cascade, HardDataConsistency)
{
  for (std::uint64_t seed : {1u, 2u}) {
    auto const f = phantom_slice(32, 4, 4.0, 12, seed);
    ComnetModel const m = init_model(ReconMode::Comnet, 3, seed, 4);
    Reconstruction const c = comnet_forward(f.s.x0, f.s.y, f.s.mask, f.s.sens, f.s.spirit.get(), m);
    Reconstruction const d = dnn_recon(f.s.x0, f.s.y, f.s.mask, f.s.sens, m);
    EXPECT_LT(dc_violation(c.kspace, f.s.y, f.s.mask), 1e-10);
    EXPECT_LT(dc_violation(d.kspace, f.s.y, f.s.mask), 1e-10);
  }
}

TEST(Cascade, ComnetNeedsKernel)
{
  auto const f = phantom_slice(16, 2, 2.0, 8, 1);
  ComnetModel const m = init_model(ReconMode::Comnet, 1, 1, 2);
  EXPECT_THROW(comnet_forward(f.s.x0, f.s.y, f.s.mask, f.s.sens, nullptr, m), InvalidArgument);
}

TEST(Cascade, InvalidModelRejected)
{
  auto const f = phantom_slice(16, 2, 2.0, 8, 1);
  ComnetModel m = init_model(ReconMode::Comnet, 2, 1, 2);
  m.etas.pop_back();
  EXPECT_THROW(comnet_forward(f.s.x0, f.s.y, f.s.mask, f.s.sens, f.s.spirit.get(), m), InvalidArgument);
}

// ---- L1-SPIRiT ------------------------------------------------------------

TEST(L1Spirit, NoIterationsGivesZeroFilled)
{
  auto const f = phantom_slice(32, 4, 4.0, 12, 7);
  L1SpiritOptions opt;
  opt.iterations = 0;
  Reconstruction const r = l1spirit_recon(f.s.y, f.s.mask, *f.s.spirit, f.s.sens, opt);
  EXPECT_EQ(distance(r.kspace.flat(), f.s.y.flat()), 0.0);
  EXPECT_LT(rel_error(r.image, f.s.x0), 1e-14);
}

TEST(L1Spirit, ConsistentDataIsFixedPointWithoutShrinkage)
{
  auto const o = oracles::chain_oracle(4, 32, 32, 5, 5, 8);
  SamplingMask const m = full_mask(32, 32);
  SpiritOperator const op(o.kernel, 32, 32);
  CoilSensitivities sens = generate_phantom(4, 32, 32, 1).sensitivities;
  L1SpiritOptions opt;
  opt.iterations = 10;
  Reconstruction const r = l1spirit_recon(o.kspace, m, op, sens, opt);
  EXPECT_LT(rel_error(r.kspace, o.kspace), 1e-12);
}

TEST(L1Spirit, BeatsZeroFilledByThreeDb)
{
  auto const f = phantom_slice(64, 4, 4.0, 16, 1);
  L1SpiritOptions opt;
  opt.tau = 0.01;
  Reconstruction const r = l1spirit_recon(f.s.y, f.s.mask, *f.s.spirit, f.s.sens, opt);
  double const zf = psnr(f.s.x0, f.s.target);
  double const l1 = psnr(r.image, f.s.target);
  RecordProperty("zf_psnr", std::to_string(zf));
  RecordProperty("l1spirit_psnr", std::to_string(l1));
  EXPECT_GT(l1, zf + 3.0);
  EXPECT_LT(dc_violation(r.kspace, f.s.y, f.s.mask), 1e-10);
}

TEST(L1Spirit, BadOptions)
{
  auto const f = phantom_slice(16, 2, 2.0, 8, 1);
  L1SpiritOptions opt;
  opt.tau = -1.0;
  EXPECT_THROW(l1spirit_recon(f.s.y, f.s.mask, *f.s.spirit, f.s.sens, opt), InvalidArgument);
  opt = {};
  opt.iterations = -1;
  EXPECT_THROW(l1spirit_recon(f.s.y, f.s.mask, *f.s.spirit, f.s.sens, opt), InvalidArgument);
}
