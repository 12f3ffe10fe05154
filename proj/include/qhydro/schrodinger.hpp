#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/fft.hpp"
#include "qhydro/field.hpp"
#include "qhydro/grid.hpp"
#include "qhydro/spectral.hpp"

namespace qhydro {

// ---------------------------------------------------------------------------
// External potentials

struct NoPotential {};

/// V(x) = m omega^2 (x - center)^2 / 2, using the minimal periodic image.
struct HarmonicPotential {
  double omega = 1.0;
  double center = 0.0;
};

/// V(x) = sum_n coefficients[n] x^n.
struct PolynomialPotential {
  std::vector<double> coefficients;
};

using PotentialSpec = std::variant<NoPotential, HarmonicPotential, PolynomialPotential>;

inline ScalarField evaluate_potential(const PotentialSpec& spec, const GridSpec& grid,
                                      const PhysicalConstants& c) {
  return std::visit(
      [&](const auto& p) -> ScalarField {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoPotential>) {
          return ScalarField::zeros(grid);
        } else if constexpr (std::is_same_v<P, HarmonicPotential>) {
          if (!(p.omega >= 0.0)) throw InvalidArgument("harmonic omega must be >= 0");
          return ScalarField::sample(grid, [&](double x) {
            const double d = grid.displacement(x, p.center);
            return 0.5 * c.mass * p.omega * p.omega * d * d;
          });
        } else {
          return ScalarField::sample(grid, [&](double x) {
            double v = 0.0;
            for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) {
              v = v * x + *it;
            }
            return v;
          });
        }
      },
      spec);
}

// ---------------------------------------------------------------------------
// Split-step propagation of i hbar psi_t = (-hbar^2/2m lap + V) psi

/// Strang splitting: half potential kick, exact kinetic drift in Fourier
/// space, half potential kick. Unitary, second order in dt.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const ScalarField& potential, const PhysicalConstants& c, double dt)
      : grid_(potential.grid()), dt_(dt) {
    c.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
    const std::size_t n = grid_.size();
    half_kick_.resize(n);
    drift_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      half_kick_[j] = std::polar(1.0, -0.5 * potential[j] * dt / c.hbar);
      const double k = grid_.wavenumber(j);
      drift_[j] = std::polar(1.0, -c.hbar * k * k * dt / (2.0 * c.mass));
    }
  }

  WaveField step(const WaveField& psi) const {
    require_same_grid(psi.grid(), grid_);
    std::vector<cplx> v = psi.to_vector();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= half_kick_[j];
    auto spec = fft::forward(v);
    for (std::size_t j = 0; j < spec.size(); ++j) spec[j] *= drift_[j];
    v = fft::inverse(spec);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= half_kick_[j];
    return WaveField(grid_, std::move(v));
  }

  double dt() const noexcept { return dt_; }

 private:
  GridSpec grid_;
  double dt_;
  std::vector<cplx> half_kick_;
  std::vector<cplx> drift_;
};

inline WaveField step_split(const WaveField& psi, const ScalarField& potential,
                            const PhysicalConstants& c, double dt) {
  return SplitStepPropagator(potential, c, dt).step(psi);
}

struct WaveSnapshot {
  double time = 0.0;
  WaveField psi;
};

/// Snapshots at steps 0, snapshot_every, 2 * snapshot_every, ... <= n_steps.
inline std::vector<WaveSnapshot> evolve(const WaveField& psi0, const ScalarField& potential,
                                        const PhysicalConstants& c, double dt, std::size_t n_steps,
                                        std::size_t snapshot_every, double t0 = 0.0) {
  if (snapshot_every == 0) throw InvalidArgument("snapshot_every must be >= 1");
  const SplitStepPropagator prop(potential, c, dt);
  std::vector<WaveSnapshot> out;
  out.reserve(n_steps / snapshot_every + 1);
  out.push_back({t0, psi0});
  WaveField psi = psi0;
  for (std::size_t s = 1; s <= n_steps; ++s) {
    psi = prop.step(psi);
    if (s % snapshot_every == 0) out.push_back({t0 + static_cast<double>(s) * dt, psi});
  }
  return out;
}

inline double norm2(const WaveField& psi) {
  double s = 0.0;
  for (const auto& z : psi.values()) s += std::norm(z);
  return s * psi.grid().spacing();
}

/// <H> with the kinetic term evaluated spectrally.
inline double energy(const WaveField& psi, const ScalarField& potential,
                     const PhysicalConstants& c) {
  const WaveField d2 = differentiate(psi, 2);
  double e = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    e += (std::conj(psi[j]) * (-c.hbar * c.hbar / (2.0 * c.mass) * d2[j])).real() +
         potential[j] * std::norm(psi[j]);
  }
  return e * psi.grid().spacing();
}

/// |<a|b>|
inline double overlap(const WaveField& a, const WaveField& b) {
  require_same_grid(a.grid(), b.grid());
  cplx s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
  return std::abs(s * a.grid().spacing());
}

// ---------------------------------------------------------------------------
// Closed-form states

struct FreeGaussian {
  double sigma0 = 1.0;
  double x0 = 0.0;
  double k0 = 0.0;
  double t = 0.0;
};

struct HoGround {
  double omega = 1.0;
  double t = 0.0;
  double center = 0.0;
};

/// Ground state displaced by x0 at t = 0 in a trap centered at `center`.
struct HoCoherent {
  double omega = 1.0;
  double x0 = 1.0;
  double t = 0.0;
  double center = 0.0;
};

struct PlaneWave {
  double k = 0.0;
  double t = 0.0;
};

/// Real standing wave cos(k x); has nodes, used for error paths.
struct StandingWave {
  double k = 0.0;
};

using OracleSpec = std::variant<FreeGaussian, HoGround, HoCoherent, PlaneWave, StandingWave>;

/// Width of a freely spreading Gaussian: sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2).
inline double free_gaussian_width(double sigma0, double t, const PhysicalConstants& c) {
  const double tau = c.hbar * t / (2.0 * c.mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + tau * tau);
}

inline WaveField oracle_state(const OracleSpec& spec, const GridSpec& grid,
                              const PhysicalConstants& c) {
  using namespace std::complex_literals;
  const double pi = std::numbers::pi;
  return std::visit(
      [&](const auto& s) -> WaveField {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FreeGaussian>) {
          if (!(s.sigma0 > 0.0)) throw InvalidArgument("free_gaussian sigma0 must be > 0");
          const double v = c.hbar * s.k0 / c.mass;
          const cplx a = 1.0 + 1i * (c.hbar * s.t / (2.0 * c.mass * s.sigma0 * s.sigma0));
          const cplx pref = std::pow(2.0 * pi * s.sigma0 * s.sigma0, -0.25) / std::sqrt(a);
          const double centre = s.x0 + v * s.t;
          const double w0 = c.hbar * s.k0 * s.k0 / (2.0 * c.mass);
          return WaveField::sample(grid, [&](double x) {
            const double d = grid.displacement(x, centre);
            return pref * std::exp(-d * d / (4.0 * s.sigma0 * s.sigma0 * a) +
                                   1i * (s.k0 * (d + v * s.t) - w0 * s.t));
          });
        } else if constexpr (std::is_same_v<S, HoGround>) {
          if (!(s.omega > 0.0)) throw InvalidArgument("ho_ground omega must be > 0");
          const double a = c.mass * s.omega / c.hbar;
          const double pref = std::pow(a / pi, 0.25);
          const cplx phase = std::polar(1.0, -0.5 * s.omega * s.t);
          return WaveField::sample(grid, [&](double x) {
            const double d = grid.displacement(x, s.center);
            return pref * std::exp(-0.5 * a * d * d) * phase;
          });
        } else if constexpr (std::is_same_v<S, HoCoherent>) {
          if (!(s.omega > 0.0)) throw InvalidArgument("ho_coherent omega must be > 0");
          const double a = c.mass * s.omega / c.hbar;
          const double pref = std::pow(a / pi, 0.25);
          const double xc = s.x0 * std::cos(s.omega * s.t);
          const double pc = -c.mass * s.omega * s.x0 * std::sin(s.omega * s.t);
          const double theta = -0.5 * s.omega * s.t - 0.5 * pc * xc / c.hbar;
          return WaveField::sample(grid, [&](double x) {
            const double d = grid.displacement(x, s.center + xc);
            return pref * std::exp(-0.5 * a * d * d + 1i * (pc * (d + xc) / c.hbar + theta));
          });
        } else if constexpr (std::is_same_v<S, PlaneWave>) {
          const double w = c.hbar * s.k * s.k / (2.0 * c.mass);
          const double amp = 1.0 / std::sqrt(grid.length());
          return WaveField::sample(grid, [&](double x) {
            return std::polar(amp, s.k * x - w * s.t);
          });
        } else {
          const double amp = std::sqrt(2.0 / grid.length());
          return WaveField::sample(grid, [&](double x) { return cplx(amp * std::cos(s.k * x)); });
        }
      },
      spec);
}

}  // namespace qhydro
