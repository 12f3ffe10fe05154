#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/field.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/report.hpp"
#include "qhydro/schrodinger.hpp"
#include "qhydro/spectral.hpp"
#include "qhydro/support.hpp"

// Direct integration of the real-valued system
//   dP/dt = -div(P grad S / m)
//   dS/dt = -[ (grad S)^2 / 2m + V + Q(P) ]
// with spectral derivatives and classical RK4 in time. The stepper carries
// the amplitude R = sqrt(P), for which the system reads
//   dR/dt = -(2 grad R . grad S + R lap S) / 2m
//   Q     = -(hbar^2 / 2m) lap R / R
// and which keeps Q well conditioned far into the tails.
//
// Where P is unresolved Q cannot be computed. There (grad S)^2 / 2m + Q is
// replaced by a quadratic in the distance from the packet centre, fitted
// with weight P over the resolved region (exact for Gaussian packets) and
// blended in with an erf ramp centered at P / max P = 1e-6. Beyond 0.35 L from the centre the action rate is blended into its
// mean and R is frozen, so S stays periodic. Below the same density level
// an absorbing layer damps modes near the de-aliasing cutoff; without it,
// roundoff at the edge of the packet is amplified.

namespace qhydro {

struct HydroRates {
  ScalarField dP_dt;
  ScalarField dS_dt;
};

/// Ramp between computed and fitted energy density, in decades of P / max P.
inline constexpr double kBlendMid = -6.0;
inline constexpr double kBlendWidth = 1.0;
/// Absorbing layer: below P / max P = 1e-6 modes above kAbsorbCutoff * k_Nyquist
/// decay at rate kAbsorbRate * (k / k_cut)^(2 kAbsorbOrder).
inline constexpr double kAbsorbMid = -6.0;
inline constexpr double kAbsorbCutoff = 0.3;
inline constexpr double kAbsorbRate = 10.0;
inline constexpr int kAbsorbOrder = 8;
/// Far-field window, as fractions of the domain length.
inline constexpr double kFarRadius = 0.35;
inline constexpr double kFarWidth = 0.025;

namespace detail {

/// Density-weighted circular mean position.
inline double packet_centre(const ScalarField& p) {
  const GridSpec& g = p.grid();
  const double k = 2.0 * std::numbers::pi / g.length();
  double cs = 0.0, sn = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    cs += p[j] * std::cos(k * g.x(j));
    sn += p[j] * std::sin(k * g.x(j));
  }
  return g.wrap(std::atan2(sn, cs) / k);
}

/// Coefficients of the weighted least-squares quadratic a + b d + c d^2.
inline std::array<double, 3> quadratic_fit(const std::vector<double>& d,
                                           const std::vector<double>& y,
                                           const std::vector<double>& weight) {
  double m[5] = {0, 0, 0, 0, 0};
  double r[3] = {0, 0, 0};
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (weight[j] <= 0.0) continue;
    double dk = weight[j];
    for (int k = 0; k < 5; ++k) {
      m[k] += dk;
      if (k < 3) r[k] += dk * y[j];
      dk *= d[j];
    }
  }
  double a[3][4] = {{m[0], m[1], m[2], r[0]}, {m[1], m[2], m[3], r[1]}, {m[2], m[3], m[4], r[2]}};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[piv][col])) piv = row;
    }
    std::swap(a[col], a[piv]);
    if (a[col][col] == 0.0) return {0.0, 0.0, 0.0};
    for (int row = 0; row < 3; ++row) {
      if (row == col) continue;
      const double f = a[row][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[row][k] -= f * a[col][k];
    }
  }
  return {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
}

/// Distances from the packet centre and the far-field window.
struct Geometry {
  std::vector<double> d;
  std::vector<double> window;
};

inline Geometry geometry(const ScalarField& p) {
  const GridSpec& g = p.grid();
  const double centre = packet_centre(p);
  Geometry geo;
  geo.d.resize(p.size());
  geo.window.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    geo.d[j] = g.displacement(g.x(j), centre);
    geo.window[j] =
        0.5 * std::erfc((std::abs(geo.d[j]) - kFarRadius * g.length()) / (kFarWidth * g.length()));
  }
  return geo;
}

/// w f + (1 - w) fit, with the fit weighted by w P.
inline std::vector<double> blend_fit(const std::vector<double>& f, const ScalarField& p,
                                     const ScalarField& w, const Geometry& geo) {
  std::vector<double> fit_weight(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) fit_weight[j] = w[j] * p[j];
  const auto [a, b, c] = quadratic_fit(geo.d, f, fit_weight);
  std::vector<double> out(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double d = geo.d[j];
    out[j] = w[j] * f[j] + (1.0 - w[j]) * (a + b * d + c * d * d);
  }
  return out;
}

/// Blends f into its density-weighted mean outside the far-field window.
inline void window_to_mean(std::vector<double>& f, const ScalarField& p, const Geometry& geo) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    num += geo.window[j] * p[j] * f[j];
    den += geo.window[j] * p[j];
  }
  const double mean = num / den;
  for (std::size_t j = 0; j < p.size(); ++j) {
    f[j] = geo.window[j] * f[j] + (1.0 - geo.window[j]) * mean;
  }
}

struct AmplitudeRates {
  ScalarField dR_dt;
  ScalarField dS_dt;
};

inline AmplitudeRates amplitude_rates(const ScalarField& r, const ScalarField& s,
                                      const ScalarField& v, const PhysicalConstants& c) {
  const ScalarField p = r * r;
  const Support sup = support_of(p);
  if (auto node = find_node(sup)) {
    throw NodeError(*node, "hydro solver: node formed at grid index " + std::to_string(*node) +
                               "; shorten the horizon or use the spectral solver");
  }
  const ScalarField ds = differentiate(s, 1);
  const ScalarField d2s = differentiate(s, 2);
  const ScalarField dr = differentiate(r, 1);
  const ScalarField d2r = differentiate(r, 2);
  const ScalarField transport = dealias(2.0 * (dr * ds) + r * d2s);
  const ScalarField kinetic = dealias(ds * ds);
  const ScalarField w = blend_weight(p, kBlendMid, kBlendWidth);
  std::vector<double> e(p.size(), 0.0);
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (w[j] > 0.0) {
      e[j] = kinetic[j] / (2.0 * c.mass) - c.hbar * c.hbar / (2.0 * c.mass) * d2r[j] / r[j];
    }
  }
  const Geometry geo = geometry(p);
  std::vector<double> h = blend_fit(e, p, w, geo);
  for (std::size_t j = 0; j < h.size(); ++j) h[j] += v[j];
  window_to_mean(h, p, geo);
  for (auto& x : h) x = -x;
  std::vector<double> drdt(p.size());
  for (std::size_t j = 0; j < drdt.size(); ++j) drdt[j] = -0.5 / c.mass * geo.window[j] * transport[j];
  return {dealias(ScalarField(p.grid(), std::move(drdt))), dealias(ScalarField(p.grid(), std::move(h)))};
}

/// Relaxes R and S toward a low-passed copy wherever P is unresolved.
inline void absorb(std::vector<double>& r, std::vector<double>& s, const ScalarField& p,
                   double dt) {
  const GridSpec& g = p.grid();
  const std::size_t n = r.size();
  const ScalarField w = blend_weight(p, kAbsorbMid, kBlendWidth);
  const double k_cut = kAbsorbCutoff * g.k_nyquist();
  std::vector<double> damp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = g.wavenumber(j) / k_cut;
    damp[j] = std::exp(-kAbsorbRate * dt * std::pow(k * k, kAbsorbOrder));
  }
  const auto filtered = [&](const std::vector<double>& f) {
    auto c = fft::forward(std::vector<cplx>(f.begin(), f.end()));
    for (std::size_t j = 0; j < n; ++j) c[j] *= damp[j];
    return fft::inverse(c);
  };
  const auto rl = filtered(r);
  const auto sl = filtered(s);
  for (std::size_t j = 0; j < n; ++j) {
    r[j] += (1.0 - w[j]) * (rl[j].real() - r[j]);
    s[j] += (1.0 - w[j]) * (sl[j].real() - s[j]);
  }
}

inline ScalarField amplitude(const ScalarField& p) {
  return p.map([](double v) { return std::sqrt(std::max(v, 0.0)); });
}

}  // namespace detail

/// Turns a decomposed state into one the hydro solver can integrate: zero
/// winding, S extended smoothly past the support, grad S spectral.
inline HydroState prepare_hydro_state(const HydroState& st) {
  if (st.winding != 0) {
    throw WindingError("hydro solver needs an action field with zero winding");
  }
  require_same_grid(st.P.grid(), st.S.grid());
  require_node_free(st.P);
  const ScalarField w = blend_weight(st.P, kBlendMid, kBlendWidth);
  const std::vector<double> s0 = st.S.to_vector();
  const detail::Geometry geo = detail::geometry(st.P);
  std::vector<double> s = detail::blend_fit(s0, st.P, w, geo);
  detail::window_to_mean(s, st.P, geo);
  ScalarField S(st.S.grid(), std::move(s));
  ScalarField grad = differentiate(S, 1);
  return HydroState{st.P, std::move(S), std::move(grad), st.time, 0, std::nullopt};
}

/// Right-hand side of the continuity and Hamilton-Jacobi-Bohm equations.
inline HydroRates hydro_rhs(const HydroState& st, const ScalarField& potential,
                            const PhysicalConstants& c) {
  require_same_grid(st.P.grid(), potential.grid());
  if (st.winding != 0) throw WindingError("hydro_rhs needs an action field with zero winding");
  const ScalarField r = detail::amplitude(st.P);
  auto rates = detail::amplitude_rates(r, st.S, potential, c);
  return {2.0 * (r * rates.dR_dt), std::move(rates.dS_dt)};
}

/// Classical RK4 with P renormalized after every step.
class HydroSolver {
 public:
  HydroSolver(ScalarField potential, PhysicalConstants c, double dt)
      : potential_(std::move(potential)), c_(c), dt_(dt) {
    c_.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  }

  HydroState step(const HydroState& st) {
    require_same_grid(st.P.grid(), potential_.grid());
    if (st.winding != 0) throw WindingError("hydro solver needs an action field with zero winding");
    const auto rhs = [&](const ScalarField& r, const ScalarField& s) {
      return detail::amplitude_rates(r, s, potential_, c_);
    };
    const double h = dt_;
    const ScalarField r0 = detail::amplitude(st.P);
    const auto k1 = rhs(r0, st.S);
    const auto k2 = rhs(r0 + (0.5 * h) * k1.dR_dt, st.S + (0.5 * h) * k1.dS_dt);
    const auto k3 = rhs(r0 + (0.5 * h) * k2.dR_dt, st.S + (0.5 * h) * k2.dS_dt);
    const auto k4 = rhs(r0 + h * k3.dR_dt, st.S + h * k3.dS_dt);

    const std::size_t n = st.P.size();
    std::vector<double> rv(n), s(n);
    for (std::size_t j = 0; j < n; ++j) {
      rv[j] = r0[j] + h / 6.0 * (k1.dR_dt[j] + 2.0 * k2.dR_dt[j] + 2.0 * k3.dR_dt[j] + k4.dR_dt[j]);
      s[j] = st.S[j] + h / 6.0 * (k1.dS_dt[j] + 2.0 * k2.dS_dt[j] + 2.0 * k3.dS_dt[j] + k4.dS_dt[j]);
    }
    detail::absorb(rv, s, st.P, h);
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = rv[j] * rv[j];
    const double mass_before = integrate(st.P);
    ScalarField P(st.P.grid(), std::move(p));
    const double mass_after = integrate(P);
    mass_drift_.push_back(mass_after - mass_before);
    P = (mass_before / mass_after) * P;

    if (auto node = find_node(support_of(P))) {
      throw NodeError(*node, "hydro solver: node formed at grid index " + std::to_string(*node) +
                                 " near t = " + std::to_string(st.time + h) +
                                 "; shorten the horizon or use the spectral solver");
    }
    ScalarField S(st.S.grid(), std::move(s));
    ScalarField grad = differentiate(S, 1);
    return HydroState{std::move(P), std::move(S), std::move(grad), st.time + h, 0, std::nullopt};
  }

  /// Snapshots at steps 0, snapshot_every, ... <= n_steps.
  std::vector<HydroState> evolve(const HydroState& initial, std::size_t n_steps,
                                 std::size_t snapshot_every) {
    if (snapshot_every == 0) throw InvalidArgument("snapshot_every must be >= 1");
    std::vector<HydroState> out{initial};
    HydroState st = initial;
    for (std::size_t k = 1; k <= n_steps; ++k) {
      st = step(st);
      if (k % snapshot_every == 0) out.push_back(st);
    }
    return out;
  }

  /// Change of integral P dx in each step before renormalization.
  const std::vector<double>& mass_drift() const noexcept { return mass_drift_; }
  double dt() const noexcept { return dt_; }

 private:
  ScalarField potential_;
  PhysicalConstants c_;
  double dt_;
  std::vector<double> mass_drift_;
};

inline HydroState hydro_step_rk4(const HydroState& st, const ScalarField& potential,
                                 const PhysicalConstants& c, double dt) {
  HydroSolver solver(potential, c, dt);
  return solver.step(st);
}

/// Relative density level above which grad S is compared between solvers.
inline constexpr double kCoreLevel = 1e-8;

/// Evolves psi0 with the split-step solver and the hydro solver side by side
/// and reports their deviation at every snapshot. A node stops the hydro run;
/// the report then covers the snapshots before the failure. The snapshot
/// series of both solvers are handed back when the pointers are set.
inline DiagnosticsReport cross_validate(const WaveField& psi0, const ScalarField& potential,
                                        const PhysicalConstants& c, double dt, std::size_t n_steps,
                                        std::size_t snapshot_every = 1,
                                        std::vector<WaveSnapshot>* spectral_out = nullptr,
                                        std::vector<HydroState>* hydro_out = nullptr) {
  if (snapshot_every == 0) throw InvalidArgument("snapshot_every must be >= 1");
  DiagnosticsReport rep;
  auto& times = rep.series["times"];
  auto& l2 = rep.series["l2_density_deviation"];
  auto& linf = rep.series["linf_grad_s_deviation"];
  auto& drift = rep.series["mass_drift"];

  const SplitStepPropagator prop(potential, c, dt);
  HydroSolver solver(potential, c, dt);
  WaveField psi = psi0;
  HydroState hs = prepare_hydro_state(decompose(psi0, c, 0.0));

  const auto record = [&](double t) {
    const ScalarField p_ref = density(psi);
    const Support core = support_of(p_ref, kCoreLevel);
    const ScalarField g_ref = grad_S_from_psi(psi, c);
    double m = 0.0;
    for (std::size_t j = 0; j < p_ref.size(); ++j) {
      if (core.contains(j)) m = std::max(m, std::abs(hs.grad_S[j] - g_ref[j]));
    }
    if (spectral_out) spectral_out->push_back({t, psi});
    if (hydro_out) hydro_out->push_back(hs);
    times.push_back(t);
    l2.push_back(l2_distance(hs.P, p_ref));
    linf.push_back(m);
    drift.push_back(integrate(hs.P) - 1.0);
  };

  record(0.0);
  bool completed = true;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    psi = prop.step(psi);
    if (spectral_out && !completed) {
      if (k % snapshot_every == 0) spectral_out->push_back({static_cast<double>(k) * dt, psi});
      continue;
    }
    try {
      hs = solver.step(hs);
    } catch (const NodeError& e) {
      completed = false;
      rep.scalars["failure_time"] = static_cast<double>(k) * dt;
      rep.notes["failure"] = e.what();
      if (!spectral_out) break;
      if (k % snapshot_every == 0) spectral_out->push_back({static_cast<double>(k) * dt, psi});
      continue;
    }
    if (k % snapshot_every == 0) record(static_cast<double>(k) * dt);
  }
  rep.verdicts["completed"] = completed;
  rep.scalars["max_l2_density_deviation"] = *std::max_element(l2.begin(), l2.end());
  rep.scalars["max_linf_grad_s_deviation"] = *std::max_element(linf.begin(), linf.end());
  double worst_step = 0.0;
  for (double d : solver.mass_drift()) worst_step = std::max(worst_step, std::abs(d));
  rep.scalars["max_step_mass_drift"] = worst_step;
  return rep;
}

}  // namespace qhydro
