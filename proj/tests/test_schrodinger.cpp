#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qhydro/qhydro.hpp"

using namespace qhydro;

namespace {

const GridSpec kGrid(512, 40.0);
const PhysicalConstants kUnits{};

double mean_position(const WaveField& psi) {
  const auto p = density(psi);
  double m = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) m += p[j] * kGrid.x(j);
  return m * kGrid.spacing();
}

double width(const WaveField& psi) {
  const auto p = density(psi);
  const double mu = mean_position(psi);
  double v = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) v += p[j] * (kGrid.x(j) - mu) * (kGrid.x(j) - mu);
  return std::sqrt(v * kGrid.spacing());
}

}  // namespace

TEST(Potential, Kinds) {
  EXPECT_LT(max_abs(evaluate_potential(NoPotential{}, kGrid, kUnits)), 1e-300);
  const auto v = evaluate_potential(HarmonicPotential{2.0, 1.0}, kGrid, kUnits);
  EXPECT_NEAR(v[256 + 64], 0.5 * 4.0 * 16.0, 1e-12);  // x = 5
  const auto poly = evaluate_potential(PolynomialPotential{{1.0, 0.0, 2.0}}, kGrid, kUnits);
  EXPECT_NEAR(poly[256 + 64], 1.0 + 2.0 * 25.0, 1e-12);
}

TEST(SplitStep, PlaneWavePhase) {
  const double k = 4.0 * 2.0 * oracle::kPi / 40.0;
  const double dt = 0.01;
  const auto psi = oracle_state(PlaneWave{k, 0.0}, kGrid, kUnits);
  const auto next = step_split(psi, evaluate_potential(NoPotential{}, kGrid, kUnits), kUnits, dt);
  for (std::size_t j = 0; j < psi.size(); j += 31) {
    EXPECT_NEAR(std::abs(next[j]), std::abs(psi[j]), 1e-14);
    EXPECT_NEAR(std::arg(next[j] / psi[j]), -k * k * dt / 2.0, 1e-12);
  }
}

TEST(SplitStep, NormPreserved) {
  const auto psi = oracle_state(HoCoherent{1.0, 1.5, 0.0}, kGrid, kUnits);
  const auto v = evaluate_potential(HarmonicPotential{1.0, 0.0}, kGrid, kUnits);
  const auto next = step_split(psi, v, kUnits, 0.05);
  EXPECT_NEAR(norm2(next), 1.0, 1e-12);
  EXPECT_THROW(step_split(psi, v, kUnits, 0.0), InvalidArgument);
}

TEST(SplitStep, CoherentStateFollowsClassicalPath) {
  const auto v = evaluate_potential(HarmonicPotential{1.0, 0.0}, kGrid, kUnits);
  const auto snaps = evolve(oracle_state(HoCoherent{1.0, 1.0, 0.0}, kGrid, kUnits), v, kUnits, 1e-3, 1000, 1000);
  EXPECT_NEAR(mean_position(snaps.back().psi), std::cos(1.0), 1e-6);
}

TEST(SplitStep, FreeWidthAtTimeTwo) {
  const auto v = evaluate_potential(NoPotential{}, kGrid, kUnits);
  const auto snaps = evolve(oracle_state(FreeGaussian{1.0, 0.0, 0.0, 0.0}, kGrid, kUnits), v, kUnits, 1e-3, 2000, 2000);
  EXPECT_NEAR(width(snaps.back().psi), oracle::free_width(1.0, 2.0), 1e-6);
  const auto want = oracle_state(FreeGaussian{1.0, 0.0, 0.0, 2.0}, kGrid, kUnits);
  EXPECT_GT(overlap(snaps.back().psi, want), 1.0 - 1e-10);
}

TEST(Evolve, ZeroStepsGivesInitialSnapshot) {
  const auto psi = oracle_state(FreeGaussian{}, kGrid, kUnits);
  const auto snaps = evolve(psi, evaluate_potential(NoPotential{}, kGrid, kUnits), kUnits, 1e-3, 0, 1);
  ASSERT_EQ(snaps.size(), 1u);
  EXPECT_EQ(snaps[0].time, 0.0);
  EXPECT_EQ(snaps[0].psi[100], psi[100]);
}

TEST(Evolve, OscillatorGroundStateIsStationary) {
  const auto psi0 = oracle_state(HoGround{1.0, 0.0}, kGrid, kUnits);
  const auto v = evaluate_potential(HarmonicPotential{1.0, 0.0}, kGrid, kUnits);
  const auto snaps = evolve(psi0, v, kUnits, 1e-3, 10000, 10000);
  EXPECT_GT(overlap(psi0, snaps.back().psi), 1.0 - 1e-8);
  EXPECT_LT(std::abs(norm2(snaps.back().psi) - 1.0), 1e-10);
}

TEST(Evolve, SnapshotCadence) {
  const auto snaps = evolve(oracle_state(FreeGaussian{}, kGrid, kUnits), evaluate_potential(NoPotential{}, kGrid, kUnits),
                            kUnits, 1e-3, 25, 10);
  ASSERT_EQ(snaps.size(), 3u);
  EXPECT_NEAR(snaps[2].time, 0.02, 1e-15);
  EXPECT_THROW(evolve(snaps[0].psi, evaluate_potential(NoPotential{}, kGrid, kUnits), kUnits, 1e-3, 5, 0),
               InvalidArgument);
}

TEST(Oracle, States) {
  const auto g = oracle_state(FreeGaussian{1.0, 0.0, 0.0, 0.0}, kGrid, kUnits);
  EXPECT_NEAR(width(g), 1.0, 1e-12);
  EXPECT_LT(std::abs(g[256].imag()), 1e-15);
  const auto a = density(oracle_state(HoGround{1.0, 0.0}, kGrid, kUnits));
  const auto b = density(oracle_state(HoGround{1.0, 3.7}, kGrid, kUnits));
  EXPECT_LT(max_abs(a - b), 1e-15);
  const auto pw = density(oracle_state(PlaneWave{2.0 * oracle::kPi / 40.0, 0.0}, kGrid, kUnits));
  EXPECT_LT(max_abs(pw - ScalarField::constant(kGrid, 1.0 / 40.0)), 1e-15);
}

// Properties.

TEST(SchrodingerProperties, EnergyConserved) {
  const auto v = evaluate_potential(PolynomialPotential{{0.0, 0.0, 0.5, 0.0, 0.1}}, kGrid, kUnits);
  const auto psi0 = oracle_state(FreeGaussian{0.8, 0.5, 1.0, 0.0}, kGrid, kUnits);
  const double e0 = energy(psi0, v, kUnits);
  // The split-step scheme conserves a shadow energy; the drift of <H> is
  // bounded by the splitting error, well below 1e-8 at this step.
  const auto snaps = evolve(psi0, v, kUnits, 2e-4, 5000, 500);
  for (const auto& s : snaps) {
    EXPECT_LT(std::abs(energy(s.psi, v, kUnits) - e0) / std::abs(e0), 1e-8);
    EXPECT_LT(std::abs(norm2(s.psi) - 1.0), 1e-10);
  }
}

TEST(SchrodingerProperties, SecondOrderInTime) {
  const auto v = evaluate_potential(HarmonicPotential{1.0, 0.0}, kGrid, kUnits);
  const auto psi0 = oracle_state(HoCoherent{1.0, 1.0, 0.0}, kGrid, kUnits);
  const auto exact = oracle_state(HoCoherent{1.0, 1.0, 1.0}, kGrid, kUnits);
  const auto err = [&](double dt) {
    const auto n = static_cast<std::size_t>(std::lround(1.0 / dt));
    const auto psi = evolve(psi0, v, kUnits, dt, n, n).back().psi;
    double s = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) s += std::norm(psi[j] - exact[j]);
    return std::sqrt(s * kGrid.spacing());
  };
  const double e1 = err(0.02), e2 = err(0.01);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
}
