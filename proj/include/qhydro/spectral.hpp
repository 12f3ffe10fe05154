#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/fft.hpp"
#include "qhydro/field.hpp"
#include "qhydro/grid.hpp"

// Fourier calculus on the periodic grid.

namespace qhydro {

namespace detail {

template <class T>
std::vector<cplx> as_complex(const Field<T>& f) {
  if constexpr (std::is_same_v<T, cplx>) {
    return f.to_vector();
  } else {
    std::vector<cplx> v(f.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = cplx(f[j], 0.0);
    return v;
  }
}

template <class T>
Field<T> from_complex(const GridSpec& grid, const std::vector<cplx>& v) {
  if constexpr (std::is_same_v<T, cplx>) {
    return Field<T>(grid, v);
  } else {
    std::vector<double> r(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) r[j] = v[j].real();
    return Field<T>(grid, std::move(r));
  }
}

inline long long signed_mode(std::size_t j, std::size_t n) {
  auto m = static_cast<long long>(j);
  return m >= static_cast<long long>(n / 2) ? m - static_cast<long long>(n) : m;
}

}  // namespace detail

/// Fourier coefficients c_m with f(x_j) = sum_m c_m exp(i k_m (x_j - x_min)).
template <class T>
std::vector<cplx> fourier_coefficients(const Field<T>& f) {
  auto c = fft::forward(detail::as_complex(f));
  const double scale = 1.0 / static_cast<double>(f.size());
  for (auto& z : c) z *= scale;
  return c;
}

/// Spectral derivative of order 1 or 2. Odd orders drop the Nyquist mode.
template <class T>
Field<T> differentiate(const Field<T>& f, int order) {
  if (order != 1 && order != 2) {
    throw InvalidArgument("differentiate: order must be 1 or 2, got " + std::to_string(order));
  }
  const GridSpec& g = f.grid();
  const std::size_t n = g.size();
  auto c = fft::forward(detail::as_complex(f));
  for (std::size_t j = 0; j < n; ++j) {
    const double k = g.wavenumber(j);
    if (order == 1) {
      c[j] = (j == n / 2) ? cplx(0.0, 0.0) : c[j] * cplx(0.0, k);
    } else {
      c[j] *= -k * k;
    }
  }
  return detail::from_complex<T>(g, fft::inverse(c));
}

/// Periodic Riemann sum, sum_j f_j * dx.
template <class T>
T integrate(const Field<T>& f) {
  T sum{};
  for (const auto& v : f.values()) sum += v;
  return sum * f.grid().spacing();
}

/// Rescales a non-negative density to unit mass.
inline ScalarField normalize(const ScalarField& p) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < 0.0) {
      throw DegenerateDensity("density has a negative entry at grid index " + std::to_string(j));
    }
  }
  const double mass = integrate(p);
  if (!(mass > 0.0)) throw DegenerateDensity("density has zero total mass");
  return (1.0 / mass) * p;
}

/// Rescales a wave field to unit norm.
inline WaveField normalize(const WaveField& psi) {
  double mass = 0.0;
  for (const auto& z : psi.values()) mass += std::norm(z);
  mass *= psi.grid().spacing();
  if (!(mass > 0.0)) throw DegenerateDensity("wave field has zero norm");
  return cplx(1.0 / std::sqrt(mass), 0.0) * psi;
}

/// Two-thirds rule: zeroes every mode with |m| > N/3.
template <class T>
Field<T> dealias(const Field<T>& f) {
  const std::size_t n = f.size();
  auto c = fft::forward(detail::as_complex(f));
  const long long cutoff = static_cast<long long>(n) / 3;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::llabs(detail::signed_mode(j, n)) > cutoff) c[j] = 0.0;
  }
  return detail::from_complex<T>(f.grid(), fft::inverse(c));
}

/// Band-limited (trigonometric) interpolation of f at an arbitrary x.
/// Costs O(N) per point.
template <class T>
T fourier_eval(const Field<T>& f, double x) {
  const GridSpec& g = f.grid();
  const std::size_t n = g.size();
  const auto c = fourier_coefficients(f);
  const double theta = g.k_fundamental() * (x - g.x_min());
  // exp(i m theta) by recurrence for m >= 0 and its conjugate for m < 0.
  const cplx step(std::cos(theta), std::sin(theta));
  cplx rot(1.0, 0.0);
  cplx sum = c[0];
  for (std::size_t m = 1; m < n / 2; ++m) {
    rot *= step;
    if (m % 64 == 0) rot = std::polar(1.0, theta * static_cast<double>(m));
    sum += c[m] * rot + c[n - m] * std::conj(rot);
  }
  sum += c[n / 2] * std::cos(theta * static_cast<double>(n / 2));
  if constexpr (std::is_same_v<T, cplx>) {
    return sum;
  } else {
    return sum.real();
  }
}

/// Band-limited refinement onto a grid with factor * N points (zero padding).
template <class T>
Field<T> upsample(const Field<T>& f, std::size_t factor) {
  if (factor == 0 || (factor & (factor - 1)) != 0) {
    throw InvalidArgument("upsample factor must be a power of two");
  }
  const GridSpec& g = f.grid();
  const std::size_t n = g.size();
  const std::size_t nf = n * factor;
  const auto c = fourier_coefficients(f);
  std::vector<cplx> cf(nf, cplx(0.0, 0.0));
  for (std::size_t m = 0; m < n / 2; ++m) cf[m] = c[m];
  for (std::size_t m = 1; m < n / 2; ++m) cf[nf - m] = c[n - m];
  if (factor > 1) {
    cf[n / 2] += 0.5 * c[n / 2];
    cf[nf - n / 2] += 0.5 * c[n / 2];
  } else {
    cf[n / 2] = c[n / 2];
  }
  for (auto& z : cf) z *= static_cast<double>(nf);
  return detail::from_complex<T>(GridSpec(nf, g.length(), g.x_min()), fft::inverse(cf));
}

/// sqrt(integral f^2 dx).
inline double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.grid().spacing());
}

inline double l2_distance(const ScalarField& a, const ScalarField& b) { return l2_norm(a - b); }

}  // namespace qhydro
