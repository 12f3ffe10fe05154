#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "qhydro/qhydro.hpp"

using namespace qhydro;

namespace {

const GridSpec kGrid(512, 40.0);
const PhysicalConstants kUnits{};

ScalarField free_potential() { return evaluate_potential(NoPotential{}, kGrid, kUnits); }
ScalarField harmonic(double omega) { return evaluate_potential(HarmonicPotential{omega, 0.0}, kGrid, kUnits); }

std::vector<HydroState> spectral_series(const WaveField& psi0, const ScalarField& v, double dt, std::size_t n,
                                        std::size_t every,
                                        WindingPolicy policy = WindingPolicy::reject) {
  std::vector<HydroState> out;
  for (const auto& s : evolve(psi0, v, kUnits, dt, n, every)) out.push_back(decompose(s.psi, kUnits, s.time, policy));
  return out;
}

// Exact snapshots of a stationary state at times 0, dt, 2 dt, ...
template <class State>
std::vector<HydroState> exact_series(State st, double dt, std::size_t count,
                                     WindingPolicy policy = WindingPolicy::reject) {
  std::vector<HydroState> out;
  for (std::size_t n = 0; n < count; ++n) {
    st.t = static_cast<double>(n) * dt;
    out.push_back(decompose(oracle_state(st, kGrid, kUnits), kUnits, st.t, policy));
  }
  return out;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST(Continuity, FreeGaussianFromSpectralSnapshots) {
  const auto series = spectral_series(oracle_state(FreeGaussian{1.0, 0.0, 1.0, 0.0}, kGrid, kUnits),
                                      free_potential(), 1e-3, 100, 1);
  EXPECT_LT(max_of(continuity_residual(series, kUnits)), 1e-5);
}

TEST(Continuity, OscillatorGroundState) {
  const auto series = exact_series(HoGround{1.0, 0.0}, 0.01, 5);
  EXPECT_LT(max_of(continuity_residual(series, kUnits)), 1e-10);
}

TEST(Continuity, CorruptedDensityIsCaught) {
  auto series = spectral_series(oracle_state(FreeGaussian{1.0, 0.0, 1.0, 0.0}, kGrid, kUnits), free_potential(),
                                1e-3, 200, 20);
  std::vector<double> p = series[5].P.to_vector();
  for (std::size_t j = 0; j < p.size() / 2; ++j) p[j] *= 1.1;
  series[5].P = ScalarField(kGrid, p);
  EXPECT_GT(max_of(continuity_residual(series, kUnits)), 1e-2);
}

TEST(Continuity, RejectsBadSeries) {
  const auto series = exact_series(HoGround{1.0, 0.0}, 0.01, 3);
  EXPECT_THROW(continuity_residual({series[0]}, kUnits), InvalidArgument);
  auto uneven = series;
  uneven[2].time = 0.05;
  EXPECT_THROW(continuity_residual(uneven, kUnits), InvalidArgument);
  auto mixed = series;
  mixed[1].P = ScalarField::constant(GridSpec(256, 40.0), 1.0 / 40.0);
  EXPECT_THROW(continuity_residual(mixed, kUnits), InvalidArgument);
}

TEST(Hjb, FreeGaussianFromSpectralSnapshots) {
  const auto series = spectral_series(oracle_state(FreeGaussian{1.0, 0.0, 1.0, 0.0}, kGrid, kUnits),
                                      free_potential(), 1e-3, 100, 1);
  EXPECT_LT(max_of(hjb_residual(series, free_potential(), kUnits)), 1e-5);
}

TEST(Hjb, OscillatorGroundState) {
  const auto series = exact_series(HoGround{1.0, 0.0}, 0.01, 5);
  EXPECT_LT(max_of(hjb_residual(series, harmonic(1.0), kUnits)), 1e-9);
}

TEST(Hjb, PlaneWave) {
  const auto series = exact_series(PlaneWave{3.0 * 2.0 * oracle::kPi / 40.0, 0.0}, 0.01, 5, WindingPolicy::allow);
  EXPECT_LT(max_of(hjb_residual(series, free_potential(), kUnits)), 1e-10);
}

TEST(Hjb, WindingMismatchIsAnError) {
  auto series = exact_series(PlaneWave{2.0 * oracle::kPi / 40.0, 0.0}, 0.01, 3, WindingPolicy::allow);
  series[1].winding = 0;
  EXPECT_THROW(hjb_residual(series, free_potential(), kUnits), WindingError);
}

TEST(Hjb, LargePhaseStepsAreAligned) {
  // Snapshots far apart in time: S jumps by more than pi per snapshot.
  const auto series = exact_series(HoGround{1.0, 0.0}, 4.0, 4);
  EXPECT_LT(max_of(hjb_residual(series, harmonic(1.0), kUnits)), 1e-9);
}

TEST(Fick, Examples) {
  const auto ho = exact_series(HoGround{1.0, 0.0}, 0.01, 3);
  const double want = 0.5 * l2_norm(differentiate(ho[1].P, 2));
  EXPECT_GT(want, 0.0);
  EXPECT_NEAR(fick_residual(ho, kUnits)[1], want, 1e-10);

  const HydroState flat{ScalarField::constant(kGrid, 1.0 / 40.0), ScalarField::zeros(kGrid), ScalarField::zeros(kGrid)};
  auto flat1 = flat;
  flat1.time = 0.1;
  EXPECT_LT(max_of(fick_residual({flat, flat1}, kUnits)), 1e-14);

  // Free Gaussian at rest: dP/dt = 0 at t = 0, so the centered value at the
  // middle snapshot is the Laplacian term alone.
  std::vector<HydroState> g;
  for (double t : {-1e-4, 0.0, 1e-4}) {
    g.push_back(decompose(oracle_state(FreeGaussian{1.0, 0.0, 0.0, t}, kGrid, kUnits), kUnits, t));
  }
  EXPECT_NEAR(fick_residual(g, kUnits)[1], 0.5 * l2_norm(differentiate(g[1].P, 2)), 1e-8);
}

TEST(Orthogonality, Examples) {
  const auto ho = decompose(oracle_state(HoGround{1.0, 0.3}, kGrid, kUnits), kUnits, 0.3);
  EXPECT_NEAR(orthogonality_integral(ho, kUnits), 0.0, 1e-14);

  const auto pw = decompose(oracle_state(PlaneWave{2.0 * oracle::kPi / 40.0, 0.0}, kGrid, kUnits), kUnits, 0.0,
                            WindingPolicy::allow);
  EXPECT_NEAR(orthogonality_integral(pw, kUnits), 0.0, 1e-12);

  for (double t : {0.5, 1.0, 2.0}) {
    const auto st = decompose(oracle_state(FreeGaussian{1.0, 0.0, 0.0, t}, kGrid, kUnits), kUnits, t);
    const double want = -oracle::free_width_rate(1.0, t) / (2.0 * oracle::free_width(1.0, t));
    EXPECT_NEAR(orthogonality_integral(st, kUnits), want, 1e-6) << "t = " << t;
  }
}

TEST(RmsFluctuation, Examples) {
  const auto g1 = decompose(oracle_state(FreeGaussian{1.0, 0.0, 0.0, 0.0}, kGrid, kUnits), kUnits);
  const auto g2 = decompose(oracle_state(FreeGaussian{2.0, 0.0, 0.0, 0.0}, kGrid, kUnits), kUnits);
  EXPECT_NEAR(rms_fluctuation(g1, kUnits), 0.5, 1e-10);
  EXPECT_NEAR(rms_fluctuation(g2, kUnits), 0.25, 1e-10);
  const HydroState flat{ScalarField::constant(kGrid, 1.0 / 40.0), ScalarField::zeros(kGrid), ScalarField::zeros(kGrid)};
  EXPECT_LT(rms_fluctuation(flat, kUnits), 1e-14);
}

TEST(Action, OscillatorZeroPointTerm) {
  const double period = 2.0 * oracle::kPi;
  const auto series = exact_series(HoGround{1.0, 0.0}, period / 64.0, 65);
  const auto a = action_functional(series, harmonic(1.0), kUnits);
  EXPECT_NEAR(a.zpf_term, 0.25 * period, 1e-9);
  EXPECT_NEAR(a.value, a.reduced, 1e-8);
  EXPECT_LT(a.max_integrand_gap, 1e-9);
}

TEST(Action, UniformRestState) {
  HydroState a{ScalarField::constant(kGrid, 1.0 / 40.0), ScalarField::zeros(kGrid), ScalarField::zeros(kGrid)};
  auto b = a;
  b.time = 0.5;
  const auto r = action_functional({a, b}, free_potential(), kUnits);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.zpf_term, 0.0);
}

TEST(Action, FreeGaussianIntegrandReduces) {
  const auto series = spectral_series(oracle_state(FreeGaussian{1.0, 0.0, 0.5, 0.0}, kGrid, kUnits),
                                      free_potential(), 1e-3, 100, 10);
  const auto a = action_functional(series, free_potential(), kUnits);
  EXPECT_LT(a.max_integrand_gap, 1e-5);
  EXPECT_NEAR(a.value, a.reduced, 1e-5);
}

TEST(EnergyRate, Examples) {
  for (double e : energy_rate(exact_series(HoGround{1.0, 0.0}, 0.01, 4), kUnits)) EXPECT_NEAR(e, -0.5, 1e-10);

  const double k = 2.0 * 2.0 * oracle::kPi / 40.0;
  for (double e : energy_rate(exact_series(PlaneWave{k, 0.0}, 0.01, 4, WindingPolicy::allow), kUnits)) {
    EXPECT_NEAR(e, -k * k / 2.0, 1e-10);
  }

  HydroState a{ScalarField::constant(kGrid, 1.0 / 40.0), ScalarField::zeros(kGrid), ScalarField::zeros(kGrid)};
  auto b = a;
  b.time = 0.5;
  for (double e : energy_rate({a, b}, kUnits)) EXPECT_EQ(e, 0.0);
}

TEST(AuditSeries, ReportKeys) {
  const auto series = exact_series(HoGround{1.0, 0.0}, 0.01, 4);
  const auto rep = audit_series(series, harmonic(1.0), kUnits);
  for (const char* key : {"continuity_residual_L2", "hjb_residual_L2", "fick_residual_L2", "orthogonality_integral",
                          "rms_fluctuation", "energy_rate", "times"}) {
    ASSERT_TRUE(rep.series.count(key)) << key;
    EXPECT_EQ(rep.series.at(key).size(), 4u) << key;
  }
  for (const char* key : {"action_value", "action_zpf_term", "orthogonality_time_average", "hjb_residual_L2_max"}) {
    ASSERT_TRUE(rep.scalars.count(key)) << key;
    EXPECT_TRUE(std::isfinite(rep.scalars.at(key))) << key;
  }
  EXPECT_NEAR(rep.scalar("energy_rate_mean"), -0.5, 1e-10);
}

// Properties.

TEST(AuditProperties, RmsFluctuationEqualsDeltaP0) {
  gen::Rng r(41);
  for (int trial = 0; trial < 30; ++trial) {
    const auto st = decompose(gen::mixture_wave(r, kGrid), kUnits);
    EXPECT_NEAR(rms_fluctuation(st, kUnits), delta_p0(st.P, kUnits), 1e-12) << "trial " << trial;
  }
}

TEST(AuditProperties, OrthogonalityVanishesForFlatPhaseOrFlatDensity) {
  gen::Rng r(42);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = gen::mixture_density(kGrid, gen::mixture(r));
    const HydroState real{p, ScalarField::zeros(kGrid), ScalarField::zeros(kGrid)};
    EXPECT_EQ(orthogonality_integral(real, kUnits), 0.0) << "trial " << trial;

    const double k = r.integer(-5, 5) * kGrid.k_fundamental();
    const auto pw = decompose(oracle_state(PlaneWave{k, 0.0}, kGrid, kUnits), kUnits, 0.0, WindingPolicy::allow);
    EXPECT_NEAR(orthogonality_integral(pw, kUnits), 0.0, 1e-12) << "trial " << trial;
  }
}

TEST(AuditProperties, EigenstateResidualsAtQuadratureLevel) {
  gen::Rng r(43);
  for (int trial = 0; trial < 8; ++trial) {
    const double omega = r.uniform(0.6, 1.6);
    const double dt = r.uniform(0.005, 0.5);
    const auto series = exact_series(HoGround{omega, 0.0}, dt, 4);
    const auto v = harmonic(omega);
    EXPECT_LT(max_of(continuity_residual(series, kUnits)), 1e-9) << "trial " << trial;
    EXPECT_LT(max_of(hjb_residual(series, v, kUnits)), 1e-9) << "trial " << trial;
    for (double e : energy_rate(series, kUnits)) EXPECT_NEAR(e, -0.5 * omega, 1e-9) << "trial " << trial;
  }
}
