#include "oracles.hpp"
#include "support.hpp"

using namespace comnet;
using namespace testing_support;

// ---- ACS --------------------------------------------------------------

TEST(Acs, CentralBlock)
{
  auto const k = random_coils(3, 64, 64, 1);
  SamplingMask const m = generate_mask(64, 64, 2.0, 24, 24, 1);
  MultiCoilKspace const acs = extract_acs(k, m);
  ASSERT_EQ(acs.rows(), 24);
  ASSERT_EQ(acs.cols(), 24);
  for (Index c = 0; c < 3; ++c) {
    EXPECT_TRUE((acs.coil(c) == k.coil(c).block(20, 20, 24, 24)).all());
  }
}

TEST(Acs, FullMaskGivesCentralCrop)
{
  auto const k = random_coils(2, 17, 12, 2);
  SamplingMask m = full_mask(17, 12);
  m.acs_height = 5;
  m.acs_width = 4;
  MultiCoilKspace const acs = extract_acs(k, m);
  for (Index c = 0; c < 2; ++c) {
    EXPECT_TRUE((acs.coil(c) == k.coil(c).block(17 / 2 - 2, 12 / 2 - 2, 5, 4)).all());
  }
}

TEST(Acs, MissingCalibrationRegion)
{
  auto const k = random_coils(2, 16, 16, 2);
  SamplingMask m = generate_mask(16, 16, 2.0, 4, 4, 1);
  m.acs_height = 0;
  EXPECT_THROW(extract_acs(k, m), MissingCalibration);
  SamplingMask holes = generate_mask(16, 16, 2.0, 4, 4, 1);
  holes.pattern(8, 8) = 0;
  EXPECT_THROW(extract_acs(k, holes), MissingCalibration);
}

// ---- SPIRiT kernel ----------------------------------------------------

TEST(SpiritFit, RecoversKnownKernelRows)
{
  SpiritKernel const g0 = oracles::random_kernel(4, 5, 5, 42);
  for (Index c = 0; c < 4; ++c) {
    auto const o = oracles::row_oracle(g0, c, 24, 24, 100 + static_cast<std::uint64_t>(c));
    SpiritKernel const fit = fit_spirit_kernel(o.acs, 5, 5, 0.0);
    double worst = 0.0;
    for (Index ci = 0; ci < 4; ++ci) {
      for (Index dy = 0; dy < 5; ++dy) {
        for (Index dx = 0; dx < 5; ++dx) {
          worst = std::max(worst, std::abs(fit(c, ci, dy, dx) - o.truth(c, ci, dy, dx)));
        }
      }
    }
    EXPECT_LT(worst, 1e-8) << "row " << c;
  }
}

TEST(SpiritFit, SelfCenterTapIsZero)
{
  PhantomCase const pc = generate_phantom(4, 64, 64, 3);
  SamplingMask const m = generate_mask(64, 64, 4.0, 16, 16, 3);
  SpiritKernel const g = fit_spirit_kernel(extract_acs(pc.kspace, m), 5, 5, 1e-2);
  for (Index c = 0; c < 4; ++c) {
    EXPECT_EQ(g(c, c, 2, 2), Cx(0.0, 0.0));
  }
}

TEST(SpiritFit, PhantomResidualSmall)
{
  PhantomCase const pc = generate_phantom(4, 64, 64, 1);
  SamplingMask const m = generate_mask(64, 64, 4.0, 24, 24, 1);
  MultiCoilKspace const acs = extract_acs(pc.kspace, m);
  double const r = spirit_fit_residual(fit_spirit_kernel(acs, 5, 5, 1e-2), acs);
  RecordProperty("fit_residual", std::to_string(r));
  EXPECT_LT(r, 0.05);
}

TEST(SpiritFit, SmallAcsStillFitsWithRegularization)
{
  PhantomCase const pc = generate_phantom(4, 64, 64, 1);
  SamplingMask const m = generate_mask(64, 64, 4.0, 8, 8, 1);
  MultiCoilKspace const acs = extract_acs(pc.kspace, m);
  SpiritKernel const g = fit_spirit_kernel(acs, 5, 5, 1e-2);
  double const r = spirit_fit_residual(g, acs);
  RecordProperty("fit_residual_acs8", std::to_string(r));
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_LT(r, 1.0);
}

TEST(SpiritFit, RidgeLimitShrinksToZero)
{
  auto const acs = random_coils(3, 12, 12, 5);
  SpiritKernel const g = fit_spirit_kernel(acs, 3, 3, 1e12);
  double worst = 0.0;
  for (Cx const &w : g.flat()) {
    worst = std::max(worst, std::abs(w));
  }
  EXPECT_LT(worst, 1e-9);
  double const mid = [&] {
    double m = 0.0;
    for (Cx const &w : fit_spirit_kernel(acs, 3, 3, 1.0).flat()) {
      m = std::max(m, std::abs(w));
    }
    return m;
  }();
  EXPECT_GT(mid, worst);
}

TEST(SpiritFit, UnderdeterminedWithoutRegularizationIsIllConditioned)
{
  auto const acs = random_coils(4, 8, 8, 6);
  try {
    fit_spirit_kernel(acs, 5, 5, 0.0);
    FAIL() << "expected IllConditionedCalibration";
  } catch (IllConditionedCalibration const &e) {
    EXPECT_NE(std::string(e.what()).find("tikhonov"), std::string::npos);
  }
  EXPECT_NO_THROW(fit_spirit_kernel(acs, 5, 5, 1e-2));
}

TEST(SpiritFit, ArgumentChecks)
{
  auto const acs = random_coils(2, 6, 6, 7);
  EXPECT_THROW(fit_spirit_kernel(acs, 5, 5, 1e-2), InvalidArgument);
  EXPECT_THROW(fit_spirit_kernel(random_coils(2, 12, 12, 7), 4, 5, 1e-2), InvalidArgument);
  EXPECT_THROW(fit_spirit_kernel(random_coils(2, 12, 12, 7), 3, 3, -1.0), InvalidArgument);
}

TEST(SpiritApply, OperatorMatchesDirectCorrelation)
{
  SpiritKernel const g = oracles::random_kernel(3, 5, 3, 8);
  for (auto [ny, nx] : {std::pair<Index, Index>{16, 16}, {13, 10}}) {
    auto const k = random_coils(3, ny, nx, 9);
    EXPECT_LT(rel_error(apply_kernel(g, k), apply_kernel_direct(g, k)), 1e-12);
  }
}

TEST(SpiritApply, AdjointIdentity)
{
  SpiritKernel const g = oracles::random_kernel(4, 5, 5, 10);
  SpiritOperator const op(g, 20, 18);
  auto const a = random_coils(4, 20, 18, 11);
  auto const b = random_coils(4, 20, 18, 12);
  Cx const lhs = vdot(op.apply(a).flat(), b.flat());
  Cx const rhs = vdot(a.flat(), op.adjoint(b).flat());
  EXPECT_LT(std::abs(lhs - rhs) / std::abs(lhs), 1e-12);
}

TEST(SpiritApply, CoilMismatch)
{
  SpiritKernel const g = oracles::random_kernel(3, 3, 3, 1);
  EXPECT_THROW(apply_kernel(g, random_coils(4, 8, 8, 1)), InvalidArgument);
  EXPECT_THROW(apply_kernel_direct(g, random_coils(4, 8, 8, 1)), InvalidArgument);
}

TEST(SpiritOracle, ChainDataIsKernelConsistent)
{
  auto const o = oracles::chain_oracle(4, 32, 32, 5, 5, 13);
  for (Index c = 0; c < 4; ++c) {
    EXPECT_EQ(o.kernel(c, c, 2, 2), Cx(0.0, 0.0));
  }
  EXPECT_LT(rel_error(apply_kernel_direct(o.kernel, o.kspace), o.kspace), 1e-12);
  EXPECT_LT(rel_error(apply_kernel(o.kernel, o.kspace), o.kspace), 1e-12);
}

// ---- sensitivities ----------------------------------------------------

TEST(Sensitivities, PhantomMapsRecoveredOnObject)
{
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    PhantomCase const pc = generate_phantom(4, 64, 64, seed);
    SamplingMask const m = generate_mask(64, 64, 4.0, 16, 16, seed);
    CoilSensitivities const s = estimate_sensitivities(extract_acs(pc.kspace, m), 64, 64);
    ByteImage use = s.support;
    for (Index i = 0; i < use.size(); ++i) {
      if (std::abs(pc.reference.data()[i]) == 0.0) {
        use.data()[i] = 0;
      }
    }
    ASSERT_GT(use.cast<int>().sum(), 500);
    EXPECT_LT(aligned_map_error(s.maps, pc.sensitivities.maps, use), 0.05) << "seed " << seed;
  }
}

TEST(Sensitivities, NormalizationInvariant)
{
  PhantomCase const pc = generate_phantom(4, 64, 64, 2);
  SamplingMask const m = generate_mask(64, 64, 4.0, 16, 16, 2);
  CoilSensitivities const s = estimate_sensitivities(extract_acs(pc.kspace, m), 64, 64);
  ComplexImage const x = random_image(64, 64, 3);
  ComplexImage const back = coil_combine(coil_project(x, s), s);
  for (Index y = 0; y < 64; ++y) {
    for (Index xx = 0; xx < 64; ++xx) {
      Cx const want = s.support(y, xx) ? x(y, xx) : Cx{0.0, 0.0};
      ASSERT_LT(std::abs(back(y, xx) - want), 1e-6 * std::max(1.0, std::abs(x(y, xx))));
      if (s.support(y, xx)) {
        ASSERT_GE(s.maps(0, y, xx).real(), 0.0);
        ASSERT_EQ(s.maps(0, y, xx).imag(), 0.0);
      }
    }
  }
}

TEST(Sensitivities, InvariantToDataScaling)
{
  PhantomCase const pc = generate_phantom(4, 48, 48, 4);
  SamplingMask const m = generate_mask(48, 48, 3.0, 16, 16, 4);
  MultiCoilKspace acs = extract_acs(pc.kspace, m);
  CoilSensitivities const a = estimate_sensitivities(acs, 48, 48);
  for (Cx &z : acs.flat()) {
    z *= Cx{0.0, 250.0};
  }
  CoilSensitivities const b = estimate_sensitivities(acs, 48, 48);
  EXPECT_TRUE((a.support == b.support).all());
  EXPECT_LT(distance(a.maps.flat(), b.maps.flat()), 1e-8);
}

TEST(Sensitivities, SingleCoilDominantData)
{
  MultiCoilImage img(3, 32, 32);
  img.coil(1).setConstant(Cx{1.0, 0.0});
  MultiCoilKspace const k = fft2c(img);
  SamplingMask const m = generate_mask(32, 32, 2.0, 12, 12, 1);
  CoilSensitivities const s = estimate_sensitivities(extract_acs(k, m), 32, 32);
  ASSERT_GT(s.support.cast<int>().sum(), 0);
  for (Index y = 0; y < 32; ++y) {
    for (Index x = 0; x < 32; ++x) {
      if (!s.support(y, x)) {
        continue;
      }
      ASSERT_NEAR(std::abs(s.maps(1, y, x)), 1.0, 1e-10);
      ASSERT_NEAR(std::abs(s.maps(0, y, x)), 0.0, 1e-10);
      ASSERT_NEAR(std::abs(s.maps(2, y, x)), 0.0, 1e-10);
    }
  }
}

TEST(Sensitivities, EmptySubspaceFails)
{
  MultiCoilKspace const acs(3, 12, 12);
  EXPECT_THROW(estimate_sensitivities(acs, 32, 32), CalibrationFailure);
}

TEST(Sensitivities, ThresholdsValidated)
{
  auto const acs = random_coils(2, 12, 12, 1);
  EspiritOptions bad;
  bad.sv_threshold = 0.0;
  EXPECT_THROW(estimate_sensitivities(acs, 16, 16, bad), InvalidArgument);
  bad = {};
  bad.eig_threshold = 1.0;
  EXPECT_THROW(estimate_sensitivities(acs, 16, 16, bad), InvalidArgument);
}

TEST(CoilOps, AdjointPair)
{
  PhantomCase const pc = generate_phantom(4, 24, 20, 5);
  ComplexImage const x = random_image(24, 20, 1);
  auto const mimg = random_coils<ImageDomain>(4, 24, 20, 2);
  Cx const lhs = vdot(coil_project(x, pc.sensitivities).flat(), mimg.flat());
  Cx const rhs = vdot(as_span(x), as_span(coil_combine(mimg, pc.sensitivities)));
  EXPECT_LT(std::abs(lhs - rhs) / std::abs(lhs), 1e-12);
}

TEST(CoilOps, CombineProjectIsIdentityOnSupport)
{
  PhantomCase const pc = generate_phantom(3, 16, 16, 6);
  ComplexImage const x = random_image(16, 16, 3);
  EXPECT_LT(rel_error(coil_combine(coil_project(x, pc.sensitivities), pc.sensitivities), x), 1e-12);
}

TEST(CoilOps, ZeroOutsideSupport)
{
  PhantomCase pc = generate_phantom(3, 16, 16, 6);
  pc.sensitivities.support.block(0, 0, 4, 16).setZero();
  normalize_maps(pc.sensitivities);
  ComplexImage const out = coil_combine(random_coils<ImageDomain>(3, 16, 16, 4), pc.sensitivities);
  EXPECT_EQ(out.block(0, 0, 4, 16).abs().maxCoeff(), 0.0);
  EXPECT_GT(out.block(4, 0, 12, 16).abs().maxCoeff(), 0.0);
}

TEST(CoilOps, ShapeMismatch)
{
  PhantomCase const pc = generate_phantom(3, 16, 16, 6);
  EXPECT_THROW(coil_project(random_image(16, 15, 1), pc.sensitivities), InvalidArgument);
  EXPECT_THROW(coil_combine(random_coils<ImageDomain>(2, 16, 16, 1), pc.sensitivities), InvalidArgument);
}
