#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/field.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/report.hpp"
#include "qhydro/spectral.hpp"
#include "qhydro/support.hpp"

// Residuals of the real-valued field equations evaluated on snapshot series,
// plus the fluctuation and action bookkeeping built from the same fields.

namespace qhydro {

namespace detail {

/// Common snapshot spacing; throws when the series is too short or uneven.
inline double series_dt(const std::vector<HydroState>& series) {
  if (series.size() < 2) throw InvalidArgument("a residual needs at least 2 snapshots");
  const GridSpec& g = series.front().P.grid();
  const double dt = series[1].time - series[0].time;
  if (!(dt > 0.0)) throw InvalidArgument("snapshot times must increase");
  for (std::size_t n = 0; n < series.size(); ++n) {
    require_same_grid(series[n].P.grid(), g);
    require_same_grid(series[n].S.grid(), g);
    if (n > 0) {
      const double step = series[n].time - series[n - 1].time;
      if (std::abs(step - dt) > 1e-9 * dt + 1e-12 * std::abs(series[n].time)) {
        throw InvalidArgument("snapshot spacing is not uniform at snapshot " + std::to_string(n));
      }
    }
  }
  return dt;
}

/// Time derivative at snapshot n from the values f(m) of neighbouring snapshots.
template <class Get>
std::vector<double> time_derivative(std::size_t count, std::size_t n, double dt, Get f) {
  std::vector<double> out;
  if (count == 2) {
    const std::vector<double> a = f(0), b = f(1);
    out.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = (b[j] - a[j]) / dt;
    return out;
  }
  if (n == 0) {
    const std::vector<double> a = f(0), b = f(1), c = f(2);
    out.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = (-3.0 * a[j] + 4.0 * b[j] - c[j]) / (2.0 * dt);
  } else if (n + 1 == count) {
    const std::vector<double> a = f(n), b = f(n - 1), c = f(n - 2);
    out.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = (3.0 * a[j] - 4.0 * b[j] + c[j]) / (2.0 * dt);
  } else {
    const std::vector<double> a = f(n - 1), b = f(n + 1);
    out.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = (b[j] - a[j]) / (2.0 * dt);
  }
  return out;
}

/// Snapshots that enter the time stencil at snapshot n.
inline std::vector<std::size_t> stencil(std::size_t count, std::size_t n) {
  if (count == 2) return {0, 1};
  if (n == 0) return {0, 1, 2};
  if (n + 1 == count) return {n - 2, n - 1, n};
  return {n - 1, n, n + 1};
}

/// Support of snapshot n restricted to points resolved in every snapshot of
/// its stencil; S is vacuum filler elsewhere and has no time derivative.
inline Support stencil_support(const std::vector<HydroState>& series, std::size_t n) {
  Support s = support_of(series[n].P);
  for (std::size_t m : stencil(series.size(), n)) {
    if (m == n) continue;
    const Support o = support_of(series[m].P);
    for (std::size_t j = 0; j < s.inside.size(); ++j) s.inside[j] = s.inside[j] && o.contains(j);
  }
  return s;
}

inline std::vector<double> density_rate(const std::vector<HydroState>& series, std::size_t n,
                                        double dt) {
  return time_derivative(series.size(), n, dt,
                         [&](std::size_t m) { return series[m].P.to_vector(); });
}

/// dS/dt at snapshot n. Every other snapshot is aligned onto the branch of
/// its neighbour on the side of n, walking outward from n, so S may move by
/// up to pi hbar per snapshot.
inline std::vector<double> action_rate(const std::vector<HydroState>& series, std::size_t n,
                                       double dt, double hbar) {
  const double period = 2.0 * std::numbers::pi * hbar;
  for (const auto& st : series) {
    if (st.winding != series[n].winding) {
      throw WindingError("action winding changes between snapshots (" +
                         std::to_string(series[n].winding) + " vs " + std::to_string(st.winding) +
                         ")");
    }
  }
  const std::size_t lo = n >= 2 ? n - 2 : 0;
  const std::size_t hi = std::min(series.size() - 1, n + 2);
  std::vector<std::vector<double>> aligned(hi - lo + 1);
  aligned[n - lo] = series[n].S.to_vector();
  const auto align = [&](std::size_t m, std::size_t ref) {
    std::vector<double> s = series[m].S.to_vector();
    const std::vector<double>& r = aligned[ref - lo];
    for (std::size_t j = 0; j < s.size(); ++j) s[j] -= period * std::round((s[j] - r[j]) / period);
    aligned[m - lo] = std::move(s);
  };
  for (std::size_t m = n + 1; m <= hi; ++m) align(m, m - 1);
  for (std::size_t m = n; m-- > lo;) align(m, m + 1);
  return time_derivative(series.size(), n, dt, [&](std::size_t m) { return aligned[m - lo]; });
}

inline double plain_l2(const std::vector<double>& r, double dx) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s * dx);
}

/// Pointwise HJB residual dS/dt + (grad S)^2 / 2m + V + Q, zero off the support.
inline std::vector<double> hjb_pointwise(const std::vector<HydroState>& series, std::size_t n,
                                         double dt, const ScalarField& potential,
                                         const PhysicalConstants& c, const Support& s) {
  const HydroState& st = series[n];
  const std::vector<double> ds = action_rate(series, n, dt, c.hbar);
  const ScalarField q = quantum_potential_curvature_on(st.P, s, c);
  std::vector<double> r(ds.size(), 0.0);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (!s.contains(j)) continue;
    const double g = st.grad_S[j];
    r[j] = ds[j] + g * g / (2.0 * c.mass) + potential[j] + q[j];
  }
  return r;
}

}  // namespace detail

/// L2 norm of dP/dt + div(P grad S / m) at every snapshot.
inline std::vector<double> continuity_residual(const std::vector<HydroState>& series,
                                               const PhysicalConstants& c) {
  const double dt = detail::series_dt(series);
  std::vector<double> out;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const HydroState& st = series[n];
    const ScalarField flux = (1.0 / c.mass) * (st.P * st.grad_S);
    const ScalarField div = differentiate(flux, 1);
    std::vector<double> r = detail::density_rate(series, n, dt);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += div[j];
    out.push_back(detail::plain_l2(r, st.P.grid().spacing()));
  }
  return out;
}

/// Density-weighted rms of dS/dt + (grad S)^2 / 2m + V + Q over the support.
inline std::vector<double> hjb_residual(const std::vector<HydroState>& series,
                                        const ScalarField& potential,
                                        const PhysicalConstants& c) {
  const double dt = detail::series_dt(series);
  std::vector<double> out;
  for (std::size_t n = 0; n < series.size(); ++n) {
    require_node_free(series[n].P);
    const Support s = detail::stencil_support(series, n);
    const auto r = detail::hjb_pointwise(series, n, dt, potential, c, s);
    out.push_back(weighted_rms(ScalarField(series[n].P.grid(), r), series[n].P, s));
  }
  return out;
}

/// L2 norm of dP/dt + (hbar / 2m) lap P. A diagnostic, not an identity.
inline std::vector<double> fick_residual(const std::vector<HydroState>& series,
                                         const PhysicalConstants& c) {
  const double dt = detail::series_dt(series);
  std::vector<double> out;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const ScalarField lap = differentiate(series[n].P, 2);
    std::vector<double> r = detail::density_rate(series, n, dt);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += c.hbar / (2.0 * c.mass) * lap[j];
    out.push_back(detail::plain_l2(r, series[n].P.grid().spacing()));
  }
  return out;
}

/// integral P (grad S . f) dx with f = grad S0 = (hbar / 2) grad P / P. Signed.
inline double orthogonality_integral(const HydroState& st, const PhysicalConstants& c) {
  const ScalarField u = osmotic_velocity(st.P, c);
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) sum += st.P[j] * st.grad_S[j] * c.mass * u[j];
  return sum * st.P.grid().spacing();
}

/// sqrt(integral P f^2 dx) with f = grad S0, via the osmotic velocity f = m u.
inline double rms_fluctuation(const HydroState& st, const PhysicalConstants& c) {
  const ScalarField u = osmotic_velocity(st.P, c);
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) sum += st.P[j] * c.mass * c.mass * u[j] * u[j];
  return std::sqrt(sum * st.P.grid().spacing());
}

struct ActionResult {
  /// integral integral P [dS/dt + (grad S)^2 / 2m + (m/2) u^2 + V] dx dt
  double value = 0.0;
  /// integral integral (m/2) P u^2 dx dt
  double zpf_term = 0.0;
  /// integral integral P [(m/2) u^2 - Q] dx dt, what value reduces to on exact solutions
  double reduced = 0.0;
  /// max over snapshots and points of |P (dS/dt + (grad S)^2 / 2m + V + Q)|,
  /// the pointwise gap between the two integrands
  double max_integrand_gap = 0.0;
};

/// Trapezoid in time, Riemann sum in space.
inline ActionResult action_functional(const std::vector<HydroState>& series,
                                      const ScalarField& potential, const PhysicalConstants& c) {
  const double dt = detail::series_dt(series);
  ActionResult out;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const HydroState& st = series[n];
    require_node_free(st.P);
    const Support s = detail::stencil_support(series, n);
    const std::vector<double> ds = detail::action_rate(series, n, dt, c.hbar);
    const ScalarField u = osmotic_velocity(st.P, c);
    const ScalarField q = detail::quantum_potential_curvature_on(st.P, s, c);
    double full = 0.0, zpf = 0.0, reduced = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      if (!s.contains(j)) continue;
      const double g = st.grad_S[j];
      const double kin = 0.5 * c.mass * u[j] * u[j];
      full += st.P[j] * (ds[j] + g * g / (2.0 * c.mass) + kin + potential[j]);
      zpf += st.P[j] * kin;
      reduced += st.P[j] * (kin - q[j]);
      const double gap = st.P[j] * (ds[j] + g * g / (2.0 * c.mass) + potential[j] + q[j]);
      out.max_integrand_gap = std::max(out.max_integrand_gap, std::abs(gap));
    }
    const double dx = st.P.grid().spacing();
    const double w = (n == 0 || n + 1 == series.size()) ? 0.5 * dt : dt;
    out.value += w * full * dx;
    out.zpf_term += w * zpf * dx;
    out.reduced += w * reduced * dx;
  }
  return out;
}

/// Density-weighted spatial mean of dS/dt; -E for an eigenstate.
inline std::vector<double> energy_rate(const std::vector<HydroState>& series,
                                       const PhysicalConstants& c) {
  const double dt = detail::series_dt(series);
  std::vector<double> out;
  for (std::size_t n = 0; n < series.size(); ++n) {
    const Support s = detail::stencil_support(series, n);
    const std::vector<double> ds = detail::action_rate(series, n, dt, c.hbar);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < ds.size(); ++j) {
      if (!s.contains(j)) continue;
      num += series[n].P[j] * ds[j];
      den += series[n].P[j];
    }
    out.push_back(num / den);
  }
  return out;
}

namespace detail {

inline void add_series_stats(DiagnosticsReport& rep, const std::string& key,
                             const std::vector<double>& v) {
  rep.series[key] = v;
  double mx = 0.0, mean = 0.0;
  for (double x : v) {
    mx = std::max(mx, std::abs(x));
    mean += x;
  }
  rep.scalars[key + "_max"] = mx;
  rep.scalars[key + "_mean"] = v.empty() ? 0.0 : mean / static_cast<double>(v.size());
}

}  // namespace detail

/// Every residual and derivation quantity for one snapshot series.
inline DiagnosticsReport audit_series(const std::vector<HydroState>& series,
                                      const ScalarField& potential, const PhysicalConstants& c) {
  DiagnosticsReport rep;
  std::vector<double> times, ortho, rms;
  for (const auto& st : series) {
    times.push_back(st.time);
    ortho.push_back(orthogonality_integral(st, c));
    rms.push_back(rms_fluctuation(st, c));
  }
  rep.series["times"] = times;
  detail::add_series_stats(rep, "continuity_residual_L2", continuity_residual(series, c));
  detail::add_series_stats(rep, "hjb_residual_L2", hjb_residual(series, potential, c));
  detail::add_series_stats(rep, "fick_residual_L2", fick_residual(series, c));
  detail::add_series_stats(rep, "orthogonality_integral", ortho);
  detail::add_series_stats(rep, "rms_fluctuation", rms);
  detail::add_series_stats(rep, "energy_rate", energy_rate(series, c));

  double avg = 0.0;
  for (std::size_t n = 0; n < ortho.size(); ++n) {
    const double w = (n == 0 || n + 1 == ortho.size()) ? 0.5 : 1.0;
    avg += w * ortho[n];
  }
  const double span = series.back().time - series.front().time;
  const double dt = series[1].time - series[0].time;
  rep.scalars["orthogonality_time_average"] = avg * dt / span;

  const ActionResult a = action_functional(series, potential, c);
  rep.scalars["action_value"] = a.value;
  rep.scalars["action_zpf_term"] = a.zpf_term;
  rep.scalars["action_reduced"] = a.reduced;
  rep.scalars["action_max_integrand_gap"] = a.max_integrand_gap;
  return rep;
}

}  // namespace qhydro
