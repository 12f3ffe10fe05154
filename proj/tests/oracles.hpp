#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

// Closed forms used as expected values. Written from the physics directly,
// independent of the library code paths they check.

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

inline double gaussian(double x, double mu, double sigma) {
  const double d = x - mu;
  return std::exp(-d * d / (2.0 * sigma * sigma)) / (std::sqrt(2.0 * kPi) * sigma);
}

/// Width of a free packet: sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2).
inline double free_width(double sigma0, double t, double hbar = 1.0, double m = 1.0) {
  const double a = hbar * t / (2.0 * m * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + a * a);
}

/// d sigma / dt of the same packet.
inline double free_width_rate(double sigma0, double t, double hbar = 1.0, double m = 1.0) {
  const double b = hbar / (2.0 * m * sigma0 * sigma0);
  return sigma0 * b * b * t / std::sqrt(1.0 + b * b * t * t);
}

/// Free packet density about x0 + hbar k0 t / m.
inline double free_density(double x, double sigma0, double x0, double k0, double t,
                           double hbar = 1.0, double m = 1.0) {
  return gaussian(x, x0 + hbar * k0 * t / m, free_width(sigma0, t, hbar, m));
}

/// grad S of the same packet: hbar k0 + m (x - centre) sigma' / sigma.
inline double free_grad_s(double x, double sigma0, double x0, double k0, double t,
                          double hbar = 1.0, double m = 1.0) {
  const double centre = x0 + hbar * k0 * t / m;
  return hbar * k0 + m * (x - centre) * free_width_rate(sigma0, t, hbar, m) /
                         free_width(sigma0, t, hbar, m);
}

/// Oscillator ground-state width: sigma^2 = hbar / (2 m omega).
inline double ho_width(double omega, double hbar = 1.0, double m = 1.0) {
  return std::sqrt(hbar / (2.0 * m * omega));
}

/// Gaussian quantum potential (hbar^2 / 8 m sigma^2)(2 - x^2 / sigma^2).
inline double gaussian_q(double x, double sigma, double hbar = 1.0, double m = 1.0) {
  return hbar * hbar / (8.0 * m * sigma * sigma) * (2.0 - x * x / (sigma * sigma));
}

/// Second derivative of a normalized Gaussian.
inline double gaussian_d2(double x, double sigma) {
  const double s2 = sigma * sigma;
  return gaussian(x, 0.0, sigma) * (x * x / (s2 * s2) - 1.0 / s2);
}

struct Component {
  double weight, mu, sigma;
};

inline double mixture_mean(const std::vector<Component>& cs) {
  double m = 0.0, w = 0.0;
  for (const auto& c : cs) {
    m += c.weight * c.mu;
    w += c.weight;
  }
  return m / w;
}

inline double mixture_std(const std::vector<Component>& cs) {
  double m2 = 0.0, w = 0.0;
  for (const auto& c : cs) {
    m2 += c.weight * (c.sigma * c.sigma + c.mu * c.mu);
    w += c.weight;
  }
  const double mean = mixture_mean(cs);
  return std::sqrt(m2 / w - mean * mean);
}

/// Klein-Gordon dispersion c sqrt(k^2 + (m c / hbar)^2).
inline double kg_omega(double k, double m = 1.0, double c = 1.0, double hbar = 1.0) {
  const double kappa = m * c / hbar;
  return c * std::sqrt(k * k + kappa * kappa);
}

/// Bohmian free-packet trajectory x(t) = x0 sigma(t) / sigma0 (k0 = 0, centred at 0).
inline double bohm_free(double x0, double sigma0, double t, double hbar = 1.0, double m = 1.0) {
  return x0 * free_width(sigma0, t, hbar, m) / sigma0;
}

}  // namespace oracle
