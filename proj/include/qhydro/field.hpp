#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/grid.hpp"

namespace qhydro {

using cplx = std::complex<double>;

namespace detail {

inline bool is_finite(double v) noexcept { return std::isfinite(v); }
inline bool is_finite(const cplx& v) noexcept {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

}  // namespace detail

/// Immutable samples of a function on a periodic grid. Entries are finite.
template <class T>
class Field {
 public:
  using value_type = T;

  Field(GridSpec grid, std::vector<T> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw InvalidArgument("field has " + std::to_string(values_.size()) +
                            " samples but grid has " + std::to_string(grid_.size()));
    }
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (!detail::is_finite(values_[j])) {
        throw InvalidArgument("non-finite field value at grid index " + std::to_string(j));
      }
    }
  }

  static Field constant(const GridSpec& grid, T value) {
    return Field(grid, std::vector<T>(grid.size(), value));
  }

  static Field zeros(const GridSpec& grid) { return constant(grid, T{}); }

  /// Samples f(x_j) on every grid point.
  template <class F>
  static Field sample(const GridSpec& grid, F&& f) {
    std::vector<T> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = static_cast<T>(f(grid.x(j)));
    return Field(grid, std::move(v));
  }

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const T> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const T& operator[](std::size_t j) const noexcept { return values_[j]; }

  /// Returns a copy of the samples for building a derived field.
  std::vector<T> to_vector() const { return values_; }

  /// Pointwise map into a field of (possibly) another value type.
  template <class F>
  auto map(F&& f) const {
    using R = std::decay_t<decltype(f(values_[0]))>;
    std::vector<R> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), f);
    return Field<R>(grid_, std::move(out));
  }

  friend Field operator+(const Field& a, const Field& b) {
    return zip(a, b, [](const T& x, const T& y) { return x + y; });
  }
  friend Field operator-(const Field& a, const Field& b) {
    return zip(a, b, [](const T& x, const T& y) { return x - y; });
  }
  friend Field operator*(const Field& a, const Field& b) {
    return zip(a, b, [](const T& x, const T& y) { return x * y; });
  }
  friend Field operator*(T s, const Field& a) {
    return a.map([s](const T& x) { return s * x; });
  }
  friend Field operator*(const Field& a, T s) { return s * a; }

 private:
  template <class Op>
  static Field zip(const Field& a, const Field& b, Op op) {
    require_same_grid(a.grid_, b.grid_);
    std::vector<T> out(a.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = op(a.values_[j], b.values_[j]);
    return Field(a.grid_, std::move(out));
  }

  static void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw InvalidArgument("fields live on different grids");
  }

  GridSpec grid_;
  std::vector<T> values_;
};

using ScalarField = Field<double>;
using WaveField = Field<cplx>;

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw InvalidArgument("fields live on different grids");
}

inline ScalarField density(const WaveField& psi) {
  return psi.map([](const cplx& z) { return std::norm(z); });
}

inline ScalarField real_part(const WaveField& psi) {
  return psi.map([](const cplx& z) { return z.real(); });
}

inline WaveField to_complex(const ScalarField& f) {
  return f.map([](double v) { return cplx(v, 0.0); });
}

inline double max_value(const ScalarField& f) {
  return *std::max_element(f.values().begin(), f.values().end());
}

inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace qhydro
