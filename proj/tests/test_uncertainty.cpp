#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "qhydro/qhydro.hpp"

using namespace qhydro;

namespace {

const GridSpec kGrid(512, 40.0);
const PhysicalConstants kUnits{};

ScalarField gaussian_p(double sigma, double mu = 0.0) {
  return ScalarField::sample(kGrid, [&](double x) { return oracle::gaussian(x, mu, sigma); });
}

ScalarField bimodal(double sigma, double d) {
  return gen::mixture_density(kGrid, {{1.0, -d, sigma}, {1.0, d, sigma}});
}

ScalarField skewed() {
  return normalize(ScalarField::sample(kGrid, [](double x) { return std::exp(x - 0.25 * x * x * x * x); }));
}

WaveField real_wave(const ScalarField& p) {
  return p.map([](double v) { return cplx(std::sqrt(v), 0.0); });
}

}  // namespace

TEST(Fisher, Examples) {
  EXPECT_NEAR(fisher_information(gaussian_p(1.0)), 1.0, 1e-10);
  EXPECT_NEAR(fisher_information(gaussian_p(2.0)), 0.25, 1e-10);
  EXPECT_NEAR(fisher_information(ScalarField::constant(kGrid, 1.0 / 40.0)), 0.0, 1e-20);
  EXPECT_NEAR(fisher_length(gaussian_p(1.0)), 1.0, 1e-10);
  EXPECT_NEAR(fisher_length(gaussian_p(0.5)), 0.5, 1e-10);
  EXPECT_THROW(fisher_length(ScalarField::constant(kGrid, 1.0 / 40.0)), DegenerateDensity);
}

TEST(DeltaP0, Examples) {
  EXPECT_NEAR(delta_p0(gaussian_p(1.0), kUnits), 0.5, 1e-10);
  EXPECT_NEAR(delta_p0(gaussian_p(2.0), kUnits), 0.25, 1e-10);
  EXPECT_NEAR(delta_p0(gaussian_p(1.0), kUnits) * fisher_length(gaussian_p(1.0)), 0.5, 1e-10);
  EXPECT_NEAR(delta_p0(gaussian_p(2.0), kUnits) * fisher_length(gaussian_p(2.0)), 0.5, 1e-10);
  const PhysicalConstants other{2.0, 3.0, 1.0};
  EXPECT_NEAR(delta_p0(gaussian_p(1.0), other), 1.0, 1e-10);
}

TEST(ExactProduct, Examples) {
  EXPECT_NEAR(exact_uncertainty_product(gaussian_p(1.0), kUnits), 0.5, 1e-12);
  EXPECT_NEAR(exact_uncertainty_product(bimodal(0.8, 1.5), kUnits), 0.5, 1e-10);
  EXPECT_NEAR(exact_uncertainty_product(skewed(), kUnits), 0.5, 1e-10);
  EXPECT_THROW(exact_uncertainty_product(ScalarField::constant(kGrid, 1.0 / 40.0), kUnits), DegenerateDensity);
}

TEST(PositionStd, Examples) {
  EXPECT_NEAR(position_std(gaussian_p(1.0)), 1.0, 1e-10);
  EXPECT_NEAR(position_std(bimodal(0.5, 2.0)), std::sqrt(0.25 + 4.0), 1e-10);
  EXPECT_NEAR(position_std(bimodal(0.5, 2.0)), 2.0616, 1e-4);
  const GridSpec fine(4096, 40.0);
  const auto narrow = ScalarField::sample(fine, [](double x) { return oracle::gaussian(x, 0.0, 0.05); });
  EXPECT_NEAR(position_std(narrow), 0.05, 1e-10);
}

TEST(PositionStd, PeriodicCentering) {
  // A packet straddling the seam has the same spread as a centered one.
  const auto wrapped = ScalarField::sample(kGrid, [](double x) {
    return oracle::gaussian(x, 19.5, 1.0) + oracle::gaussian(x, 19.5 - 40.0, 1.0);
  });
  EXPECT_NEAR(position_std(wrapped), 1.0, 1e-9);
  EXPECT_LT(boundary_mass(wrapped), 1e-8);
  EXPECT_LT(boundary_mass(gaussian_p(1.0)), 1e-8);
  EXPECT_GT(boundary_mass(gaussian_p(5.0)), 1e-8);
}

TEST(MomentumStd, Examples) {
  EXPECT_NEAR(momentum_std(oracle_state(FreeGaussian{1.0, 0.0, 0.0, 0.0}, kGrid, kUnits), kUnits), 0.5, 1e-10);
  EXPECT_NEAR(momentum_std(oracle_state(FreeGaussian{1.0, 0.0, 2.0, 0.0}, kGrid, kUnits), kUnits), 0.5, 1e-10);
  for (double t : {0.5, 2.0, 4.0}) {
    EXPECT_NEAR(momentum_std(oracle_state(FreeGaussian{1.0, 0.0, 0.0, t}, kGrid, kUnits), kUnits), 0.5, 1e-8);
  }
}

TEST(HeisenbergReport, GaussianSaturatesEverything) {
  const auto rep = heisenberg_report(oracle_state(FreeGaussian{1.0, 0.0, 0.0, 0.0}, kGrid, kUnits), kUnits);
  EXPECT_NEAR(rep.scalar("dx_std"), 1.0, 1e-10);
  EXPECT_NEAR(rep.scalar("dx_fisher"), 1.0, 1e-10);
  EXPECT_NEAR(rep.scalar("dp_std"), 0.5, 1e-10);
  EXPECT_NEAR(rep.scalar("dp0"), 0.5, 1e-10);
  EXPECT_NEAR(rep.scalar("product_heisenberg"), 0.5, 1e-10);
  EXPECT_NEAR(rep.scalar("product_exact"), 0.5, 1e-12);
  EXPECT_TRUE(rep.verdict("cramer_rao"));
  EXPECT_TRUE(rep.verdict("momentum_bound"));
  EXPECT_TRUE(rep.verdict("heisenberg"));
  EXPECT_EQ(rep.notes.count("warning"), 0u);
}

TEST(HeisenbergReport, BimodalIsStrict) {
  const auto rep = heisenberg_report(real_wave(bimodal(0.6, 1.8)), kUnits);
  EXPECT_GT(rep.scalar("dx_std"), rep.scalar("dx_fisher") * 1.01);
  EXPECT_TRUE(rep.verdict("cramer_rao"));
  EXPECT_TRUE(rep.verdict("momentum_bound"));
  EXPECT_TRUE(rep.verdict("heisenberg"));
}

TEST(HeisenbergReport, SpreadingGaussianDecomposition) {
  const double t = 2.0;
  const auto rep = heisenberg_report(oracle_state(FreeGaussian{1.0, 0.0, 0.0, t}, kGrid, kUnits), kUnits);
  EXPECT_NEAR(rep.scalar("dp_std"), 0.5, 1e-8);
  EXPECT_NEAR(rep.scalar("dp0"), 0.5 / oracle::free_width(1.0, t), 1e-8);
  EXPECT_LT(rep.scalar("dp0"), 0.5);
  EXPECT_LT(std::abs(rep.scalar("decomposition_residual")), 1e-6);
  EXPECT_GT(rep.scalar("dp_linear"), rep.scalar("dp_std"));
}

TEST(HeisenbergReport, BoundaryWarningAndNodes) {
  const auto broad = oracle_state(FreeGaussian{5.0, 0.0, 0.0, 0.0}, kGrid, kUnits);
  EXPECT_EQ(heisenberg_report(broad, kUnits).notes.count("warning"), 1u);
  const auto nodal = oracle_state(StandingWave{2.0 * 2.0 * oracle::kPi / 40.0}, kGrid, kUnits);
  EXPECT_THROW(heisenberg_report(nodal, kUnits), NodeError);
}

// Properties.

TEST(UncertaintyProperties, ExactProductIsHalfHbar) {
  gen::Rng r(51);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = gen::mixture_density(kGrid, gen::mixture(r));
    EXPECT_NEAR(exact_uncertainty_product(p, kUnits), 0.5, 1e-12) << "trial " << trial;
  }
}

TEST(UncertaintyProperties, InequalitiesHoldOnMixtures) {
  gen::Rng r(52);
  int violations = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto psi = gen::mixture_wave(r, kGrid);
    const auto rep = heisenberg_report(psi, kUnits);
    for (const char* v : {"cramer_rao", "momentum_bound", "heisenberg"}) violations += rep.verdict(v) ? 0 : 1;
    EXPECT_GE(rep.scalar("dx_std"), rep.scalar("dx_fisher") * (1.0 - 1e-9)) << "trial " << trial;
    EXPECT_GE(rep.scalar("dp_std"), rep.scalar("dp0") * (1.0 - 1e-9)) << "trial " << trial;
    EXPECT_GE(rep.scalar("product_heisenberg"), 0.5 * (1.0 - 1e-9)) << "trial " << trial;
  }
  EXPECT_EQ(violations, 0);
}

TEST(UncertaintyProperties, VarianceDecomposition) {
  gen::Rng r(53);
  for (int trial = 0; trial < 40; ++trial) {
    const auto rep = heisenberg_report(gen::mixture_wave(r, kGrid), kUnits);
    EXPECT_LT(std::abs(rep.scalar("decomposition_residual")), 1e-6) << "trial " << trial;
  }
}

TEST(UncertaintyProperties, GaussianSaturatesCramerRao) {
  gen::Rng r(54);
  for (int trial = 0; trial < 20; ++trial) {
    const double sigma = r.uniform(0.4, 2.5);
    const auto p = gaussian_p(sigma, r.uniform(-5.0, 5.0));
    EXPECT_NEAR(position_std(p), fisher_length(p), 1e-8) << "trial " << trial;
  }
}
