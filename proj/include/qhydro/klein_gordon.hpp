#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qhydro/audit.hpp"
#include "qhydro/error.hpp"
#include "qhydro/fft.hpp"
#include "qhydro/field.hpp"
#include "qhydro/spectral.hpp"
#include "qhydro/support.hpp"

// Free Klein-Gordon field in 1+1 dimensions,
//   (1/c^2) d^2 Psi/dt^2 - d^2 Psi/dx^2 + (mc/hbar)^2 Psi = 0,
// with metric signature (+,-) and x^0 = ct. With Psi = sqrt(P) exp(+i S/hbar):
//   d_mu S d^mu S   = (1/c^2)(dS/dt)^2 - (dS/dx)^2
//   d_mu (P d^mu S) = (1/c^2) d/dt (P dS/dt) - d/dx (P dS/dx)
//   box             = (1/c^2) d^2/dt^2 - d^2/dx^2

namespace qhydro {

struct KGState {
  WaveField Psi;
  WaveField dPsi_dt;
  double time = 0.0;
};

/// omega(k) = c sqrt(k^2 + (mc/hbar)^2)
inline double kg_frequency(double k, const PhysicalConstants& c) {
  const double kappa = c.mass * c.c / c.hbar;
  return c.c * std::sqrt(k * k + kappa * kappa);
}

/// Exact evolution of every Fourier mode by dt.
class KGPropagator {
 public:
  KGPropagator(const GridSpec& grid, const PhysicalConstants& c, double dt)
      : grid_(grid), dt_(dt) {
    c.validate_relativistic();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
    const std::size_t n = grid.size();
    cos_.resize(n);
    sin_over_w_.resize(n);
    w_sin_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = kg_frequency(grid.wavenumber(j), c);
      cos_[j] = std::cos(w * dt);
      sin_over_w_[j] = w > 0.0 ? std::sin(w * dt) / w : dt;
      w_sin_[j] = w * std::sin(w * dt);
    }
  }

  KGState step(const KGState& st) const {
    require_same_grid(st.Psi.grid(), grid_);
    auto a = fft::forward(st.Psi.values());
    auto b = fft::forward(st.dPsi_dt.values());
    for (std::size_t j = 0; j < a.size(); ++j) {
      const cplx a0 = a[j], b0 = b[j];
      a[j] = cos_[j] * a0 + sin_over_w_[j] * b0;
      b[j] = -w_sin_[j] * a0 + cos_[j] * b0;
    }
    return {WaveField(grid_, fft::inverse(a)), WaveField(grid_, fft::inverse(b)), st.time + dt_};
  }

  double dt() const noexcept { return dt_; }

 private:
  GridSpec grid_;
  double dt_;
  std::vector<double> cos_, sin_over_w_, w_sin_;
};

inline KGState kg_step(const KGState& st, const PhysicalConstants& c, double dt) {
  return KGPropagator(st.Psi.grid(), c, dt).step(st);
}

/// Snapshots at steps 0, snapshot_every, ... <= n_steps.
inline std::vector<KGState> kg_evolve(const KGState& initial, const PhysicalConstants& c,
                                      double dt, std::size_t n_steps, std::size_t snapshot_every) {
  if (snapshot_every == 0) throw InvalidArgument("snapshot_every must be >= 1");
  const KGPropagator prop(initial.Psi.grid(), c, dt);
  std::vector<KGState> out{initial};
  KGState st = initial;
  for (std::size_t s = 1; s <= n_steps; ++s) {
    st = prop.step(st);
    if (s % snapshot_every == 0) out.push_back(st);
  }
  return out;
}

/// Positive-frequency plane wave exp(i (k x - omega t)) with amplitude 1 / sqrt(L).
inline KGState kg_mode(const GridSpec& grid, double k, const PhysicalConstants& c,
                       double t = 0.0) {
  const double w = kg_frequency(k, c);
  const double amp = 1.0 / std::sqrt(grid.length());
  const WaveField psi =
      WaveField::sample(grid, [&](double x) { return std::polar(amp, k * x - w * t); });
  return {psi, cplx(0.0, -w) * psi, t};
}

/// Positive-frequency packet: Gaussian of width sigma about x0 in position,
/// carrier k0, every Fourier mode paired with its own frequency.
inline KGState kg_packet(const GridSpec& grid, double sigma, double x0, double k0,
                         const PhysicalConstants& c) {
  if (!(sigma > 0.0)) throw InvalidArgument("kg_packet sigma must be > 0");
  const double pref = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  const WaveField g = WaveField::sample(grid, [&](double x) {
    const double d = grid.displacement(x, x0);
    return std::polar(pref * std::exp(-d * d / (4.0 * sigma * sigma)), k0 * d);
  });
  auto spec = fft::forward(g.values());
  for (std::size_t j = 0; j < spec.size(); ++j) {
    spec[j] *= cplx(0.0, -kg_frequency(grid.wavenumber(j), c));
  }
  return {g, WaveField(grid, fft::inverse(spec)), 0.0};
}

/// Conserved Klein-Gordon charge -(2/c^2) integral Im(Psi* dPsi/dt) dx;
/// positive for positive-frequency fields.
inline double kg_charge(const KGState& st, const PhysicalConstants& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < st.Psi.size(); ++j) {
    s += (std::conj(st.Psi[j]) * st.dPsi_dt[j]).imag();
  }
  return -2.0 / (c.c * c.c) * s * st.Psi.grid().spacing();
}

/// Second time derivative from the dispersion relation, per Fourier mode.
inline WaveField kg_second_time_derivative(const WaveField& psi, const PhysicalConstants& c) {
  auto spec = fft::forward(psi.values());
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = kg_frequency(psi.grid().wavenumber(j), c);
    spec[j] *= -w * w;
  }
  return WaveField(psi.grid(), fft::inverse(spec));
}

struct KGFields {
  ScalarField P;
  ScalarField dS_dt;
  ScalarField dS_dx;
};

/// P = |Psi|^2, dS/dt = hbar Im(Psi* dPsi/dt) / P, dS/dx = hbar Im(Psi* dPsi/dx) / P.
inline KGFields kg_decompose(const KGState& st, const PhysicalConstants& c) {
  const ScalarField p = density(st.Psi);
  const Support s = require_node_free(p);
  const WaveField dx = differentiate(st.Psi, 1);
  std::vector<double> st_v(p.size(), 0.0), sx_v(p.size(), 0.0);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!s.contains(j)) continue;
    st_v[j] = c.hbar * (std::conj(st.Psi[j]) * st.dPsi_dt[j]).imag() / p[j];
    sx_v[j] = c.hbar * (std::conj(st.Psi[j]) * dx[j]).imag() / p[j];
  }
  return {p, ScalarField(p.grid(), std::move(st_v)), ScalarField(p.grid(), std::move(sx_v))};
}

/// L2 norm of (1/c^2) d/dt (P dS/dt) - d/dx (P dS/dx) at every snapshot, with
/// the time derivative by finite differences over the series.
inline std::vector<double> covariant_continuity_residual(const std::vector<KGState>& series,
                                                         const PhysicalConstants& c) {
  if (series.size() < 2) throw InvalidArgument("a residual needs at least 2 snapshots");
  std::vector<KGFields> f;
  for (const auto& st : series) f.push_back(kg_decompose(st, c));
  const double dt = series[1].time - series[0].time;
  if (!(dt > 0.0)) throw InvalidArgument("snapshot times must increase");
  for (std::size_t n = 1; n < series.size(); ++n) {
    require_same_grid(series[n].Psi.grid(), series[0].Psi.grid());
    if (std::abs(series[n].time - series[n - 1].time - dt) > 1e-9 * dt) {
      throw InvalidArgument("snapshot spacing is not uniform at snapshot " + std::to_string(n));
    }
  }
  std::vector<double> out;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const auto rate = detail::time_derivative(series.size(), n, dt, [&](std::size_t m) {
      return (f[m].P * f[m].dS_dt).to_vector();
    });
    const ScalarField div = differentiate(f[n].P * f[n].dS_dx, 1);
    std::vector<double> r(rate.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = rate[j] / (c.c * c.c) - div[j];
    out.push_back(detail::plain_l2(r, series[n].Psi.grid().spacing()));
  }
  return out;
}

struct RelativisticHJB {
  /// Density-weighted rms of d_mu S d^mu S - m^2 c^2 - hbar^2 box sqrt(P) / sqrt(P).
  std::vector<double> residual;
  /// M = sqrt(d_mu S d^mu S) / c, 0 where the radicand is not positive.
  std::vector<ScalarField> effective_mass;
  /// Support points per snapshot where the radicand is not positive.
  std::vector<std::size_t> flagged;
};

inline RelativisticHJB relativistic_hjb_residual(const std::vector<KGState>& series,
                                                 const PhysicalConstants& c) {
  RelativisticHJB out;
  const double c2 = c.c * c.c;
  const double mc2 = c.mass * c.mass * c2;
  for (const auto& st : series) {
    const KGFields f = kg_decompose(st, c);
    const Support s = support_of(f.P);
    const std::size_t n = f.P.size();
    // sqrt(P) derivatives from Psi: with R = |Psi|,
    //   R_t  = Re(Psi* Psi_t) / R
    //   R_tt = [Re(Psi* Psi_tt) + |Psi_t|^2 - R_t^2] / R, likewise in x.
    const WaveField psi_tt = kg_second_time_derivative(st.Psi, c);
    const WaveField psi_x = differentiate(st.Psi, 1);
    const WaveField psi_xx = differentiate(st.Psi, 2);
    std::vector<double> r(n, 0.0), m(n, 0.0);
    std::size_t flagged = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!s.contains(j)) continue;
      const cplx z = st.Psi[j];
      const double p = f.P[j];
      const double rt = (std::conj(z) * st.dPsi_dt[j]).real();
      const double rx = (std::conj(z) * psi_x[j]).real();
      const double box_r_over_r =
          ((std::conj(z) * psi_tt[j]).real() + std::norm(st.dPsi_dt[j]) - rt * rt / p) / (c2 * p) -
          ((std::conj(z) * psi_xx[j]).real() + std::norm(psi_x[j]) - rx * rx / p) / p;
      const double inv = f.dS_dt[j] * f.dS_dt[j] / c2 - f.dS_dx[j] * f.dS_dx[j];
      r[j] = inv - mc2 - c.hbar * c.hbar * box_r_over_r;
      if (inv > 0.0) {
        m[j] = std::sqrt(inv) / c.c;
      } else {
        ++flagged;
      }
    }
    const GridSpec& g = f.P.grid();
    out.residual.push_back(weighted_rms(ScalarField(g, r), f.P, s));
    out.effective_mass.emplace_back(g, std::move(m));
    out.flagged.push_back(flagged);
  }
  return out;
}

}  // namespace qhydro
