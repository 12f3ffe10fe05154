#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/fft.hpp"
#include "qhydro/field.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/report.hpp"
#include "qhydro/spectral.hpp"
#include "qhydro/support.hpp"

// Fisher information of a density and the uncertainty relations built on it.

namespace qhydro {

/// I = integral (grad P)^2 / P dx over the support.
inline double fisher_information(const ScalarField& p) {
  const Support s = require_node_free(p);
  const ScalarField dp = differentiate(p, 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (s.contains(j)) sum += dp[j] * dp[j] / p[j];
  }
  return sum * p.grid().spacing();
}

/// delta x = I^(-1/2).
inline double fisher_length(const ScalarField& p) {
  const double info = fisher_information(p);
  const double l = p.grid().length();
  if (!(info * l * l > 1e-20)) {
    throw DegenerateDensity("Fisher information vanishes; the Fisher length is unbounded");
  }
  return 1.0 / std::sqrt(info);
}

/// delta p0 = (hbar / 2) sqrt(I).
inline double delta_p0(const ScalarField& p, const PhysicalConstants& c) {
  return 0.5 * c.hbar * std::sqrt(fisher_information(p));
}

/// delta x * delta p0 with delta p0 taken through the osmotic velocity,
/// sqrt(integral P (m u)^2 dx), rather than through I.
inline double exact_uncertainty_product(const ScalarField& p, const PhysicalConstants& c) {
  const double dx = fisher_length(p);
  const ScalarField u = osmotic_velocity(p, c);
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) sum += p[j] * c.mass * c.mass * u[j] * u[j];
  return dx * std::sqrt(sum * p.grid().spacing());
}

namespace detail {

/// Circular mean position of a density on the periodic domain.
inline double circular_mean(const ScalarField& p) {
  const GridSpec& g = p.grid();
  const double kf = g.k_fundamental();
  double cs = 0.0, sn = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    cs += p[j] * std::cos(kf * g.x(j));
    sn += p[j] * std::sin(kf * g.x(j));
  }
  return g.wrap(std::atan2(sn, cs) / kf);
}

}  // namespace detail

/// Standard deviation of position, with moments taken about the circular mean.
inline double position_std(const ScalarField& p) {
  const GridSpec& g = p.grid();
  const double centre = detail::circular_mean(p);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double d = g.displacement(g.x(j), centre);
    m0 += p[j];
    m1 += p[j] * d;
    m2 += p[j] * d * d;
  }
  m1 /= m0;
  m2 /= m0;
  return std::sqrt(std::max(m2 - m1 * m1, 0.0));
}

/// Fraction of the mass within L/20 of the point opposite the packet centre.
inline double boundary_mass(const ScalarField& p) {
  const GridSpec& g = p.grid();
  const double centre = detail::circular_mean(p);
  double far = 0.0, total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    total += p[j];
    if (std::abs(g.displacement(g.x(j), centre)) > 0.45 * g.length()) far += p[j];
  }
  return far / total;
}

/// Standard deviation of momentum from |psi~(k)|^2.
inline double momentum_std(const WaveField& psi, const PhysicalConstants& c) {
  const auto spec = fft::forward(psi.values());
  const GridSpec& g = psi.grid();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = std::norm(spec[j]);
    const double k = g.wavenumber(j);
    m0 += w;
    m1 += w * k;
    m2 += w * k * k;
  }
  m1 /= m0;
  m2 /= m0;
  return c.hbar * std::sqrt(std::max(m2 - m1 * m1, 0.0));
}

/// integral P (grad S)^2 dx - (integral P grad S dx)^2 for normalized P.
inline double grad_s_variance(const ScalarField& p, const ScalarField& grad_s) {
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    mass += p[j];
    m1 += p[j] * grad_s[j];
    m2 += p[j] * grad_s[j] * grad_s[j];
  }
  m1 /= mass;
  m2 /= mass;
  return m2 - m1 * m1;
}

/// Relative slack for the inequality verdicts, which Gaussians saturate.
inline constexpr double kVerdictSlack = 1e-9;

/// Fisher and moment uncertainties of psi and the inequalities between them.
inline DiagnosticsReport heisenberg_report(const WaveField& psi, const PhysicalConstants& c) {
  const WaveField phi = normalize(psi);
  const ScalarField p = density(phi);
  const double dxf = fisher_length(p);
  const double dp0 = delta_p0(p, c);
  const double dxs = position_std(p);
  const double dps = momentum_std(phi, c);
  const double var_g = grad_s_variance(p, grad_S_from_psi(phi, c));
  const double half = 0.5 * c.hbar;

  DiagnosticsReport rep;
  rep.scalars["dx_fisher"] = dxf;
  rep.scalars["dp0"] = dp0;
  rep.scalars["dx_std"] = dxs;
  rep.scalars["dp_std"] = dps;
  rep.scalars["product_exact"] = exact_uncertainty_product(p, c);
  rep.scalars["product_heisenberg"] = dxs * dps;
  rep.scalars["var_grad_s"] = var_g;
  rep.scalars["decomposition_residual"] = dps * dps - var_g - dp0 * dp0;
  rep.scalars["dp_linear"] = std::sqrt(std::max(var_g, 0.0)) + dp0;
  rep.scalars["boundary_mass"] = boundary_mass(p);
  const double lo = 1.0 - kVerdictSlack;
  rep.verdicts["cramer_rao"] = dxs >= lo * dxf;
  rep.verdicts["momentum_bound"] = dps >= lo * dp0;
  rep.verdicts["heisenberg"] = dxs * dps >= lo * half;
  if (rep.scalars["boundary_mass"] > 1e-8) {
    rep.notes["warning"] = "more than 1e-8 of the mass lies near the periodic boundary";
  }
  return rep;
}

}  // namespace qhydro
