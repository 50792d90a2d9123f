#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mpaudit/verification.hpp"
#include "oracles.hpp"

namespace mpaudit {
namespace {

const MpaParams kDefaultMap{3.6, 0.9};
const Mixing2 kShear{1.0, 0.5, 0.0, 1.0};

Dataset uniform_disk(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point2> pts;
  pts.reserve(n);
  while (pts.size() < n) {
    const Point2 p{u(rng), u(rng)};
    if (p.x1 * p.x1 + p.x2 * p.x2 <= 1.0) pts.push_back(p);
  }
  return Dataset(std::move(pts), Label::LatentZ, seed);
}

Dataset map_points(const Dataset& d, const PointMap& f, Label label) {
  std::vector<Point2> pts;
  pts.reserve(d.size());
  for (const auto& p : d.points()) pts.push_back(f(p));
  return Dataset(std::move(pts), label, d.seed());
}

Dataset zprime_for(std::size_t n, std::uint64_t seed) {
  return apply_pipeline(kShear, kDefaultMap, sample_uniform_square(n, seed)).zprime;
}

// ---------------------------------------------------------------- continuity

TEST(CheckContinuity, IdentityPassesWithUnitRatio) {
  const PointMap id = [](const Point2& z) { return z; };
  const auto r = check_continuity(id, Box::unit_square(), 500, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.statistic, 1.0, 1e-6);
}

TEST(CheckContinuity, RotationRatioBoundedByLocalLipschitz) {
  // Dense-grid sup of the closed-form Jacobian norm, independent of the scan.
  double sup = 0.0;
  for (int i = -400; i <= 400; ++i) {
    for (int j = -400; j <= 400; ++j) {
      const auto J = oracle::rotation_jacobian(3.6, 0.9, i / 400.0, j / 400.0 + 1e-9);
      sup = std::max(sup, J.norm());
    }
  }
  ASSERT_NEAR(sup, oracle::rotation_lipschitz(3.6, 0.9), 1e-2);
  ASSERT_LE(sup, 1.0 + 0.9 * 3.6);

  const PointMap h = [](const Point2& z) { return mpa_forward(kDefaultMap, z); };
  const auto r = check_continuity(h, Box::unit_square(), 2000, 3);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.statistic, oracle::rotation_lipschitz(3.6, 0.9) + 1e-4);
  EXPECT_LE(r.statistic, 1.0 + 0.9 * 3.6 + 1e-6);
  EXPECT_GT(r.statistic, 1.5);
}

TEST(CheckContinuity, StepFunctionFails) {
  const PointMap step = [](const Point2& z) { return z.x1 > 0.0 ? Point2{z.x1 + 1.0, z.x2} : z; };
  const auto r = check_continuity(step, Box::unit_square(), 1000, 4);
  EXPECT_FALSE(r.pass);
  EXPECT_GE(r.statistic, 1e6);
}

TEST(CheckContinuity, DegenerateDomainAndTooFewPairs) {
  const PointMap id = [](const Point2& z) { return z; };
  try {
    check_continuity(id, {0.0, 0.0, -1.0, 1.0}, 500, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDomain);
  }
  EXPECT_THROW(check_continuity(id, Box::unit_square(), 99, 1), Error);
}

// ------------------------------------------------------------- sigma algebra

TEST(CheckSigmaAlgebra, IdentityHasZeroError) {
  const auto z = sample_uniform_square(1000, 1);
  const PointMap id = [](const Point2& p) { return p; };
  const auto r = check_sigma_algebra_proxy(z, z, id, id);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.statistic, 0.0);
}

TEST(CheckSigmaAlgebra, PipelineRoundTrip) {
  const auto z = sample_uniform_square(20000, 2);
  const auto zp = apply_pipeline(kShear, kDefaultMap, z).zprime;
  const PointMap h = [](const Point2& p) { return mpa_forward(kDefaultMap, p); };
  const PointMap hinv = [](const Point2& p) { return mpa_inverse(kDefaultMap, p); };
  const auto r = check_sigma_algebra_proxy(z, zp, h, hinv);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.statistic, 1e-12);
}

TEST(CheckSigmaAlgebra, BrokenPairingFails) {
  const auto z = sample_uniform_square(20000, 3);
  const auto zp = zprime_for(20000, 3);
  std::vector<Point2> pts(zp.points().begin(), zp.points().end());
  std::mt19937_64 rng(9);
  std::shuffle(pts.begin(), pts.end(), rng);
  const Dataset shuffled(std::move(pts), Label::LatentZprime, 3);
  const PointMap h = [](const Point2& p) { return mpa_forward(kDefaultMap, p); };
  const PointMap hinv = [](const Point2& p) { return mpa_inverse(kDefaultMap, p); };
  const auto r = check_sigma_algebra_proxy(z, shuffled, h, hinv);
  EXPECT_FALSE(r.pass);
  // Max distance between unrelated points of [-1,1]^2 approaches the diameter.
  EXPECT_GT(r.statistic, 2.0);
  EXPECT_LE(r.statistic, 2.0 * std::sqrt(2.0) + 1e-12);
}

TEST(CheckSigmaAlgebra, LengthMismatch) {
  const PointMap id = [](const Point2& p) { return p; };
  try {
    check_sigma_algebra_proxy(sample_uniform_square(10, 1), sample_uniform_square(11, 1), id, id);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Pairing);
  }
}

// ----------------------------------------------------------- compact support

TEST(CheckCompactSupport, Examples) {
  EXPECT_TRUE(check_compact_support(sample_uniform_square(10000, 1), Box::unit_square()).pass);
  const Dataset outlier({{0.0, 0.0}, {1.5, 0.0}}, Label::LatentZ, 0);
  const auto r = check_compact_support(outlier, Box::unit_square());
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.bounds.hi1, 1.5);
}

TEST(CheckCompactSupport, RotatedSamplesStayInSquare) {
  const auto r = check_compact_support(zprime_for(1000000, 11), Box::unit_square());
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.bounds.hi1, 1.0);
  EXPECT_GE(r.bounds.lo2, -1.0);
}

// ------------------------------------------------------- independent support

TEST(CheckIndependentSupport, UniformSquarePasses) {
  const auto r = check_independent_support(sample_uniform_square(100000, 1), 10, 5);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.occupied_fraction, 1.0);
}

TEST(CheckIndependentSupport, DiskFails) {
  const auto r = check_independent_support(uniform_disk(100000, 1), 10, 5);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(r.occupied_fraction, 1.0);
  EXPECT_FALSE(r.grid.occupied(0, 0));
  EXPECT_TRUE(r.grid.marginal1[0]);
  EXPECT_TRUE(r.grid.marginal2[0]);
}

TEST(CheckIndependentSupport, RotatedSamplesPass) {
  const auto r = check_independent_support(zprime_for(100000, 5), 10, 5);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.occupied_fraction, 1.0);
}

TEST(CheckIndependentSupport, UndersampledReportsRequiredSize) {
  try {
    check_independent_support(sample_uniform_square(2499, 1), 10, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undersampled);
    EXPECT_NE(std::string(e.what()).find("2500"), std::string::npos);
  }
}

TEST(SupportGrid, OccupiedCellImpliesOccupiedMarginals) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const Dataset& d : {uniform_disk(5000, seed), sample_uniform_square(5000, seed)}) {
      const auto g = build_support_grid(d, 7, 3);
      for (std::size_t i = 0; i < 7; ++i) {
        for (std::size_t j = 0; j < 7; ++j) {
          if (g.occupied(i, j)) {
            EXPECT_TRUE(g.marginal1[i]);
            EXPECT_TRUE(g.marginal2[j]);
          }
        }
      }
    }
  }
  EXPECT_THROW(build_support_grid(sample_uniform_square(10, 1), 1, 1), Error);
}

// ---------------------------------------------------------------- uniformity

TEST(ChiSquare, UpperTailMatchesReferenceValues) {
  for (const auto& t : oracle::kChiSquareTails) {
    EXPECT_NEAR(chi_square_sf(t.statistic, t.dof), t.sf, 1e-9 * t.sf) << t.statistic;
  }
  EXPECT_EQ(chi_square_sf(0.0, 5.0), 1.0);
  EXPECT_EQ(chi_square_sf(INFINITY, 5.0), 0.0);
}

TEST(CheckUniformity, UniformSquarePasses) {
  EXPECT_GT(check_uniformity(sample_uniform_square(100000, 1), 10), 0.001);
}

TEST(CheckUniformity, PValuesAreUniformUnderTheNull) {
  int below_tenth = 0;
  int below_half = 0;
  constexpr int kSeeds = 200;
  for (int s = 0; s < kSeeds; ++s) {
    const double p = check_uniformity(sample_uniform_square(10000, 1000 + s), 10);
    below_tenth += p < 0.1;
    below_half += p < 0.5;
  }
  EXPECT_GE(below_tenth, 8);
  EXPECT_LE(below_tenth, 34);
  EXPECT_GE(below_half, 76);
  EXPECT_LE(below_half, 124);
}

TEST(CheckUniformity, RotatedSamplesPass) {
  EXPECT_GT(check_uniformity(zprime_for(100000, 8), 10), 0.001);

  // Second oracle: a 7 x 7 grid counted here, judged by the normal
  // approximation (X - k) / sqrt(2k) of the chi-square statistic.
  const auto zp = zprime_for(1000000, 9);
  constexpr int kBins = 7;
  std::vector<double> counts(kBins * kBins, 0.0);
  for (const auto& p : zp.points()) {
    const int i = std::min(kBins - 1, static_cast<int>((p.x1 + 1.0) / 2.0 * kBins));
    const int j = std::min(kBins - 1, static_cast<int>((p.x2 + 1.0) / 2.0 * kBins));
    counts[i * kBins + j] += 1.0;
  }
  const double expected = 1e6 / (kBins * kBins);
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  const double k = kBins * kBins - 1;
  EXPECT_LT((stat - k) / std::sqrt(2.0 * k), 4.0);
}

TEST(CheckUniformity, QuadrantDataRejected) {
  std::vector<Point2> pts;
  const auto z = sample_uniform_square(100000, 4);
  for (const auto& p : z.points()) pts.push_back({0.5 * (p.x1 + 1.0), 0.5 * (p.x2 + 1.0)});
  EXPECT_LT(check_uniformity(Dataset(std::move(pts), Label::LatentZ, 4), 10), 1e-10);
}

TEST(CheckUniformity, OutsideSquareAndUndersampled) {
  std::vector<Point2> pts(600, Point2{0.1, 0.1});
  pts.push_back({1.5, 0.0});
  EXPECT_EQ(check_uniformity(Dataset(pts, Label::LatentZ, 0), 10), 0.0);
  try {
    check_uniformity(sample_uniform_square(499, 1), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undersampled);
  }
}

// ------------------------------------------------------------------ relation

TEST(CheckCoordinatewiseRelation, IdenticalRepresentations) {
  const auto z = sample_uniform_square(20000, 1);
  const auto v = check_coordinatewise_relation(z, z, 10, 0.01);
  EXPECT_TRUE(v.coordinatewise);
  EXPECT_EQ(v.best, Permutation::Identity);
  EXPECT_LT(v.best_scores().worst(), 1.0 / 100.0);
  EXPECT_GT(v.best_scores().worst(), 0.5 / 100.0);
  EXPECT_EQ(v.best_scores().direction[0], Monotonicity::Increasing);
}

TEST(CheckCoordinatewiseRelation, SwapWithNegationAndCube) {
  const auto z = sample_uniform_square(20000, 2);
  const auto zp = map_points(z, [](const Point2& p) { return Point2{-p.x2, p.x1 * p.x1 * p.x1}; },
                             Label::LatentZprime);
  const auto v = check_coordinatewise_relation(z, zp, 10, 0.01);
  EXPECT_TRUE(v.coordinatewise);
  EXPECT_EQ(v.best, Permutation::Swap);
  EXPECT_EQ(v.best_scores().direction[0], Monotonicity::Increasing);
  EXPECT_EQ(v.best_scores().direction[1], Monotonicity::Decreasing);
  EXPECT_GT(v.per_permutation[0].worst(), 0.5);
}

TEST(CheckCoordinatewiseRelation, RotationIsNotCoordinatewise) {
  const auto z = sample_uniform_square(100000, 42);
  const auto zp = apply_pipeline(kShear, kDefaultMap, z).zprime;
  const auto v = check_coordinatewise_relation(z, zp, 50, 0.01);
  EXPECT_FALSE(v.coordinatewise);
  EXPECT_GE(std::min(v.per_permutation[0].worst(), v.per_permutation[1].worst()), 0.05);
}

TEST(CheckCoordinatewiseRelation, NonInjectiveFunctionIsNotCoordinatewise) {
  const auto z = sample_uniform_square(20000, 3);
  const auto zp = map_points(z, [](const Point2& p) { return Point2{p.x1 * p.x1, p.x2}; }, Label::LatentZprime);
  const auto v = check_coordinatewise_relation(z, zp, 20, 0.01);
  EXPECT_FALSE(v.coordinatewise);
  // Z'_1 is a function of Z_1, but Z_1 is not recoverable from Z'_1.
  EXPECT_LT(v.per_permutation[0].reverse[0], 0.01);
  EXPECT_GT(v.per_permutation[0].forward[0], 0.5);
}

// Exact coordinate-wise constructions must be accepted for any bins >= 10.
TEST(CheckCoordinatewiseRelation, SoundnessProperty) {
  using Fn = double (*)(double);
  const Fn maps[] = {
      [](double t) { return t; },
      [](double t) { return -t; },
      [](double t) { return t * t * t; },
      [](double t) { return std::exp(3.0 * t); },
      [](double t) { return std::tanh(4.0 * t) - 2.0; },
      [](double t) { return -std::atan(10.0 * t); },
      [](double t) { return 5.0 * t + 100.0; },
  };
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(maps) - 1);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t bins = std::array<std::size_t, 3>{10, 20, 50}[trial % 3];
    // Non-uniform latents too: squash one coordinate.
    auto base = sample_uniform_square(10000, 500 + trial);
    if (trial % 2 == 1) {
      base = map_points(base, [](const Point2& p) { return Point2{p.x1 * std::abs(p.x1), p.x2}; }, Label::LatentZ);
    }
    const Fn q1 = maps[pick(rng)];
    const Fn q2 = maps[pick(rng)];
    const bool swap = coin(rng);
    const auto zp = map_points(
        base,
        [&](const Point2& p) { return swap ? Point2{q2(p.x2), q1(p.x1)} : Point2{q1(p.x1), q2(p.x2)}; },
        Label::LatentZprime);
    const auto v = check_coordinatewise_relation(base, zp, bins, 0.01);
    EXPECT_TRUE(v.coordinatewise) << "trial " << trial;
    EXPECT_EQ(v.best, swap ? Permutation::Swap : Permutation::Identity) << "trial " << trial;
    EXPECT_LT(v.best_scores().worst(), 1.0 / static_cast<double>(bins * bins));
  }
}

TEST(CheckCoordinatewiseRelation, Errors) {
  const auto z = sample_uniform_square(1000, 1);
  try {
    check_coordinatewise_relation(z, sample_uniform_square(999, 1), 10, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Pairing);
  }
  try {
    check_coordinatewise_relation(z, z, 50, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undersampled);
  }
}

// --------------------------------------------------------------------- audit

TEST(RunAudit, DegenerateFixtureIsCoordinatewise) {
  const auto r = run_audit(Mixing2::identity(), MpaParams::degenerate_fixture(0.9), 100000, 42);
  EXPECT_TRUE(r.premises_pass());
  EXPECT_TRUE(r.conclusion.coordinatewise);
  EXPECT_FALSE(r.counterexample_certified());
}

TEST(RunAudit, DefaultParametersCertifyCounterexample) {
  const auto r = run_audit(kShear, kDefaultMap, 100000, 42);
  EXPECT_TRUE(r.continuity.pass) << r.continuity.detail;
  EXPECT_TRUE(r.sigma_algebra.pass);
  EXPECT_TRUE(r.compact_support.pass);
  EXPECT_TRUE(r.independent_support.pass);
  EXPECT_TRUE(r.independent_support_pass_z);
  EXPECT_TRUE(r.independent_support_pass_zprime);
  EXPECT_GT(r.uniformity_pvalue_zprime, 0.001);
  EXPECT_FALSE(r.conclusion.coordinatewise);
  EXPECT_TRUE(r.counterexample_certified());
  EXPECT_EQ(r.parameters.n, 100000u);
  EXPECT_EQ(r.parameters.seed, 42u);
}

TEST(RunAudit, InvalidCutoffRejectedBeforeAuditing) {
  EXPECT_THROW(run_audit(kShear, MpaParams(3.6, 1.5), 100000, 42), Error);
}

TEST(RunAudit, ComponentErrorsNameTheCheck) {
  try {
    run_audit(kShear, kDefaultMap, 1000, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undersampled);
    EXPECT_NE(std::string(e.what()).find("check 'independent-support'"), std::string::npos) << e.what();
  }
}

TEST(RunAudit, Deterministic) {
  const auto a = run_audit(kShear, kDefaultMap, 20000, 5);
  const auto b = run_audit(kShear, kDefaultMap, 20000, 5);
  EXPECT_EQ(a.continuity.statistic, b.continuity.statistic);
  EXPECT_EQ(a.uniformity_pvalue_zprime, b.uniformity_pvalue_zprime);
  EXPECT_EQ(a.conclusion.per_permutation[0].forward, b.conclusion.per_permutation[0].forward);
  EXPECT_EQ(a.conclusion.per_permutation[1].reverse, b.conclusion.per_permutation[1].reverse);
}

TEST(RunAudit, VerdictsStableWhenSampleGrows) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto small = run_audit(kShear, kDefaultMap, 10000, seed);
    const auto large = run_audit(kShear, kDefaultMap, 100000, seed);
    EXPECT_EQ(small.continuity.pass, large.continuity.pass) << seed;
    EXPECT_EQ(small.sigma_algebra.pass, large.sigma_algebra.pass) << seed;
    EXPECT_EQ(small.compact_support.pass, large.compact_support.pass) << seed;
    EXPECT_EQ(small.independent_support.pass, large.independent_support.pass) << seed;
    EXPECT_EQ(small.conclusion.coordinatewise, large.conclusion.coordinatewise) << seed;
    EXPECT_EQ(small.counterexample_certified(), large.counterexample_certified()) << seed;
  }
}

TEST(AuditExternal, SkipsAnalyticPremises) {
  const auto z = sample_uniform_square(20000, 2);
  const auto r = audit_external(z, z, {});
  EXPECT_FALSE(r.continuity.applicable);
  EXPECT_FALSE(r.sigma_algebra.applicable);
  EXPECT_TRUE(r.premises_pass());
  EXPECT_TRUE(r.conclusion.coordinatewise);
  EXPECT_FALSE(r.counterexample_certified());
}

}  // namespace
}  // namespace mpaudit
