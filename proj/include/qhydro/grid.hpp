#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "qhydro/error.hpp"

namespace qhydro {

/// Uniform periodic 1D grid. Point j sits at x_min + j * spacing; point
/// n_points wraps onto point 0.
class GridSpec {
 public:
  GridSpec(std::size_t n_points, double length)
      : GridSpec(n_points, length, -0.5 * length) {}

  GridSpec(std::size_t n_points, double length, double x_min)
      : n_(n_points), length_(length), x_min_(x_min) {
    if (n_ < 4 || (n_ & (n_ - 1)) != 0) {
      throw InvalidArgument("grid n_points must be a power of two >= 4, got " +
                            std::to_string(n_));
    }
    if (!(length_ > 0.0) || !std::isfinite(length_)) {
      throw InvalidArgument("grid length must be positive and finite");
    }
    if (!std::isfinite(x_min_)) {
      throw InvalidArgument("grid origin must be finite");
    }
  }

  std::size_t size() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / static_cast<double>(n_); }
  double x_min() const noexcept { return x_min_; }
  /// Spatial dimension. Only 1 is implemented.
  int dim() const noexcept { return 1; }

  double x(std::size_t j) const noexcept {
    return x_min_ + static_cast<double>(j) * spacing();
  }

  /// Angular wavenumber of FFT bin j, in FFT order (0, 1, ..., N/2-1, -N/2, ..., -1).
  double wavenumber(std::size_t j) const noexcept {
    const auto n = static_cast<long long>(n_);
    auto m = static_cast<long long>(j);
    if (m >= n / 2) m -= n;
    return 2.0 * std::numbers::pi / length_ * static_cast<double>(m);
  }

  double k_fundamental() const noexcept { return 2.0 * std::numbers::pi / length_; }
  double k_nyquist() const noexcept { return std::numbers::pi / spacing(); }

  /// Maps x onto [x_min, x_min + length).
  double wrap(double x) const noexcept {
    double r = std::fmod(x - x_min_, length_);
    if (r < 0.0) r += length_;
    if (r >= length_) r -= length_;
    return x_min_ + r;
  }

  /// Minimal-image displacement a - b in [-L/2, L/2).
  double displacement(double a, double b) const noexcept {
    double d = std::fmod(a - b + 0.5 * length_, length_);
    if (d < 0.0) d += length_;
    return d - 0.5 * length_;
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
    return a.n_ == b.n_ && a.length_ == b.length_ && a.x_min_ == b.x_min_;
  }

 private:
  std::size_t n_;
  double length_;
  double x_min_;
};

/// Physical constants. Defaults are natural units hbar = m = c = 1.
struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
  double c = 1.0;
  double omega = 1.0;

  void validate() const {
    validate_relativistic();
    if (!(mass > 0.0)) throw InvalidArgument("mass must be > 0");
  }

  /// The Klein-Gordon solver also admits the massless case.
  void validate_relativistic() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("hbar must be > 0");
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw InvalidArgument("mass must be >= 0");
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("c must be > 0");
    if (!(omega >= 0.0) || !std::isfinite(omega)) throw InvalidArgument("omega must be >= 0");
  }
};

}  // namespace qhydro
