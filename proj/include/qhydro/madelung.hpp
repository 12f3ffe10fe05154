#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/field.hpp"
#include "qhydro/grid.hpp"
#include "qhydro/spectral.hpp"
#include "qhydro/support.hpp"

// Madelung transform between psi and (P, S), with psi = sqrt(P) exp(+i S / hbar),
// and the zero-point fields built from P alone.

namespace qhydro {

/// The (P, S) pair at one instant.
///
/// S is exact (up to a constant) on the support of P. Outside the support it
/// is set to the density-weighted mean of S and carries no information.
/// `winding` counts how many times S advances by 2 pi hbar around the
/// periodic domain; only fully supported states (plane-wave-like) can wind.
/// `grad_S` is the action gradient, zero outside the support. When the state
/// came from a wave field that field is kept in `psi` so consumers can
/// interpolate it instead of the masked gradient.
struct HydroState {
  ScalarField P;
  ScalarField S;
  ScalarField grad_S;
  double time = 0.0;
  int winding = 0;
  std::optional<WaveField> psi;
};

enum class WindingPolicy { reject, allow };

namespace detail {

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

// hbar * Im(psi* dpsi) / |psi|^2 on the support, 0 elsewhere.
inline ScalarField current_gradient(const WaveField& psi, const Support& s, double hbar) {
  const WaveField dpsi = differentiate(psi, 1);
  std::vector<double> g(psi.size(), 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!s.contains(j)) continue;
    g[j] = hbar * (std::conj(psi[j]) * dpsi[j]).imag() / std::norm(psi[j]);
  }
  return ScalarField(psi.grid(), std::move(g));
}

struct PhaseResult {
  std::vector<double> S;
  int winding = 0;
};

// Unwraps the phase on every support arc, anchored at the densest point of
// the arc, and fills the vacuum with the weighted mean of S.
inline PhaseResult unwrap_phase(const WaveField& psi, const ScalarField& p, const Support& s,
                                double hbar) {
  const std::size_t n = psi.size();
  PhaseResult out;
  out.S.assign(n, 0.0);
  std::vector<double> theta(n);
  for (std::size_t j = 0; j < n; ++j) theta[j] = std::arg(psi[j]);

  if (s.full()) {
    out.S[0] = theta[0];
    for (std::size_t j = 1; j < n; ++j) {
      out.S[j] = out.S[j - 1] + wrap_angle(theta[j] - theta[j - 1]);
    }
    const double closing = out.S[n - 1] + wrap_angle(theta[0] - theta[n - 1]) - out.S[0];
    out.winding = static_cast<int>(std::lround(closing / (2.0 * std::numbers::pi)));
    for (auto& v : out.S) v *= hbar;
    return out;
  }

  double num = 0.0, den = 0.0;
  for (const Arc& a : arcs(s, true)) {
    std::size_t anchor_off = 0;
    for (std::size_t off = 0; off < a.length; ++off) {
      if (p[(a.begin + off) % n] > p[(a.begin + anchor_off) % n]) anchor_off = off;
    }
    const std::size_t anchor = (a.begin + anchor_off) % n;
    out.S[anchor] = theta[anchor];
    for (std::size_t off = anchor_off + 1; off < a.length; ++off) {
      const std::size_t j = (a.begin + off) % n;
      const std::size_t prev = (j + n - 1) % n;
      out.S[j] = out.S[prev] + wrap_angle(theta[j] - theta[prev]);
    }
    for (std::size_t off = anchor_off; off-- > 0;) {
      const std::size_t j = (a.begin + off) % n;
      const std::size_t next = (j + 1) % n;
      out.S[j] = out.S[next] + wrap_angle(theta[j] - theta[next]);
    }
    for (std::size_t off = 0; off < a.length; ++off) {
      const std::size_t j = (a.begin + off) % n;
      num += p[j] * out.S[j];
      den += p[j];
    }
  }
  const double mean = den > 0.0 ? num / den : 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out.S[j] = hbar * (s.contains(j) ? out.S[j] : mean);
  }
  return out;
}

inline HydroState madelung_fields(const WaveField& psi, const Support& s, double hbar,
                                  double time) {
  ScalarField p = density(psi);
  auto phase = unwrap_phase(psi, p, s, hbar);
  ScalarField grad = current_gradient(psi, s, hbar);
  return HydroState{std::move(p), ScalarField(psi.grid(), std::move(phase.S)), std::move(grad),
                    time, phase.winding, psi};
}

}  // namespace detail

/// psi -> (P, S). Rejects nodes, and by default any net phase winding.
inline HydroState decompose(const WaveField& psi, const PhysicalConstants& c, double time = 0.0,
                            WindingPolicy policy = WindingPolicy::reject) {
  const Support s = require_node_free(density(psi));
  HydroState st = detail::madelung_fields(psi, s, c.hbar, time);
  if (policy == WindingPolicy::reject && st.winding != 0) {
    throw WindingError("wave field phase winds " + std::to_string(st.winding) +
                       " time(s) around the periodic domain");
  }
  return st;
}

/// Like decompose, but tolerates nodes: every support arc is unwrapped on its
/// own. Used for output of runs that may pass through nodes.
inline HydroState decompose_lenient(const WaveField& psi, const PhysicalConstants& c,
                                    double time = 0.0) {
  const Support s = support_of(density(psi));
  return detail::madelung_fields(psi, s, c.hbar, time);
}

namespace detail {

// The periodic seam must look like any other step of S, modulo 2 pi hbar.
inline void check_seam(const ScalarField& S, double hbar) {
  const std::size_t n = S.size();
  const double period = 2.0 * std::numbers::pi * hbar;
  const double seam = S[0] - S[n - 1];
  const double expected = S[n - 1] - S[n - 2];
  const double mismatch = std::remainder(seam - expected, period);
  const double curvature =
      std::abs(S[n - 1] - 2.0 * S[n - 2] + S[n - 3]) + std::abs(S[2] - 2.0 * S[1] + S[0]);
  if (std::abs(mismatch) > 10.0 * curvature + 1e-9 * period) {
    throw WindingError("action field is discontinuous across the periodic seam (mismatch " +
                       std::to_string(mismatch) + ")");
  }
}

}  // namespace detail

/// (P, S) -> psi = sqrt(P) exp(+i S / hbar), normalized.
inline WaveField compose(const HydroState& state, const PhysicalConstants& c) {
  require_same_grid(state.P.grid(), state.S.grid());
  for (std::size_t j = 0; j < state.P.size(); ++j) {
    if (state.P[j] < 0.0) {
      throw DegenerateDensity("negative density at grid index " + std::to_string(j));
    }
  }
  detail::check_seam(state.S, c.hbar);
  std::vector<cplx> v(state.P.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    v[j] = std::polar(std::sqrt(state.P[j]), state.S[j] / c.hbar);
  }
  return normalize(WaveField(state.P.grid(), std::move(v)));
}

/// grad S = hbar Im(psi* grad psi) / |psi|^2, without phase unwrapping.
inline ScalarField grad_S_from_psi(const WaveField& psi, const PhysicalConstants& c) {
  const Support s = require_node_free(density(psi));
  return detail::current_gradient(psi, s, c.hbar);
}

/// Zero-point action S0 = (hbar / 2) ln(P / P_ref). Vacuum points are clamped
/// to the floor. P_ref defaults to max P.
inline ScalarField s0_from_P(const ScalarField& p, const PhysicalConstants& c,
                             std::optional<double> p_ref = std::nullopt) {
  const Support s = require_node_free(p);
  const double ref = p_ref.value_or(s.p_max);
  if (!(ref > 0.0)) throw InvalidArgument("s0_from_P: reference density must be > 0");
  return p.map([&](double v) { return 0.5 * c.hbar * std::log(std::max(v, s.floor) / ref); });
}

/// Osmotic velocity u = (hbar / 2m) grad P / P on the support, 0 elsewhere.
inline ScalarField osmotic_velocity(const ScalarField& p, const PhysicalConstants& c) {
  const Support s = require_node_free(p);
  const ScalarField dp = differentiate(p, 1);
  std::vector<double> u(p.size(), 0.0);
  const double f = c.hbar / (2.0 * c.mass);
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (s.contains(j)) u[j] = f * dp[j] / p[j];
  }
  return ScalarField(p.grid(), std::move(u));
}

namespace detail {

inline ScalarField quantum_potential_on(const ScalarField& p, const Support& s,
                                        const PhysicalConstants& c) {
  const ScalarField dp = differentiate(p, 1);
  const ScalarField d2p = differentiate(p, 2);
  std::vector<double> q(p.size(), 0.0);
  const double f = c.hbar * c.hbar / (4.0 * c.mass);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (!s.contains(j)) continue;
    const double lg = dp[j] / p[j];
    q[j] = f * (0.5 * lg * lg - d2p[j] / p[j]);
  }
  return ScalarField(p.grid(), std::move(q));
}

}  // namespace detail

/// Quantum potential Q = (hbar^2 / 4m) [ (grad P / P)^2 / 2 - lap P / P ] on
/// the support, 0 elsewhere.
inline ScalarField quantum_potential(const ScalarField& p, const PhysicalConstants& c) {
  const Support s = require_node_free(p);
  return detail::quantum_potential_on(p, s, c);
}

namespace detail {

inline ScalarField quantum_potential_curvature_on(const ScalarField& p, const Support& s,
                                                  const PhysicalConstants& c) {
  const ScalarField r = p.map([](double v) { return std::sqrt(std::max(v, 0.0)); });
  const ScalarField d2r = differentiate(r, 2);
  std::vector<double> q(p.size(), 0.0);
  const double f = -c.hbar * c.hbar / (2.0 * c.mass);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (s.contains(j)) q[j] = f * d2r[j] / r[j];
  }
  return ScalarField(p.grid(), std::move(q));
}

}  // namespace detail

/// Same quantity through the amplitude curvature, -(hbar^2 / 2m) lap sqrt(P) / sqrt(P).
/// Better conditioned in the tails: its roundoff grows like 1 / sqrt(P), not 1 / P.
inline ScalarField quantum_potential_curvature(const ScalarField& p, const PhysicalConstants& c) {
  const Support s = require_node_free(p);
  return detail::quantum_potential_curvature_on(p, s, c);
}

}  // namespace qhydro
