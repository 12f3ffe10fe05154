#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/field.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/spectral.hpp"
#include "qhydro/support.hpp"

// Bohmian trajectories dx/dt = grad S / m through a sequence of snapshots.
//
// Snapshot fields are refined by zero padding and then evaluated with
// six-point Lagrange interpolation, which keeps the band-limited accuracy at
// O(1) cost per particle. Between snapshots the velocity is linear in time.

namespace qhydro {

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  double P = 0.0;
  double div_v = 0.0;
};

struct Trajectory {
  double x0 = 0.0;
  std::vector<TrajectorySample> samples;
  bool truncated = false;
  double truncation_time = 0.0;
};

/// Velocity, density and velocity divergence at one point.
struct FlowPoint {
  double P = 0.0;
  double v = 0.0;
  double div_v = 0.0;
  bool resolved = false;
};

namespace detail {

/// Six-point Lagrange weights for nodes -2..3 at offset t in [0, 1).
inline std::array<double, 6> lagrange6(double t) {
  std::array<double, 6> w{};
  for (int m = 0; m < 6; ++m) {
    double num = 1.0, den = 1.0;
    for (int k = 0; k < 6; ++k) {
      if (k == m) continue;
      num *= t - static_cast<double>(k - 2);
      den *= static_cast<double>(m - k);
    }
    w[static_cast<std::size_t>(m)] = num / den;
  }
  return w;
}

template <class T>
T interpolate6(const std::vector<T>& f, std::size_t i0, const std::array<double, 6>& w) {
  const std::size_t n = f.size();
  T sum{};
  for (std::size_t m = 0; m < 6; ++m) sum += w[m] * f[(i0 + n - 2 + m) % n];
  return sum;
}

}  // namespace detail

/// Snapshot sequence prepared for pointwise evaluation of the Bohmian flow.
/// Snapshots built from a wave field use psi, psi' and psi''; the others use
/// P, grad S and its derivative.
class FlowField {
 public:
  FlowField(std::vector<HydroState> snapshots, PhysicalConstants c, std::size_t refine = 8)
      : snaps_(std::move(snapshots)), c_(c), refine_(refine) {
    c_.validate();
    if (snaps_.empty()) throw InvalidArgument("flow field needs at least one snapshot");
    for (std::size_t n = 1; n < snaps_.size(); ++n) {
      require_same_grid(snaps_[n].P.grid(), snaps_[0].P.grid());
      if (!(snaps_[n].time > snaps_[n - 1].time)) {
        throw InvalidArgument("snapshot times must increase");
      }
    }
  }

  std::size_t size() const noexcept { return snaps_.size(); }
  double time(std::size_t n) const { return snaps_[n].time; }
  const HydroState& snapshot(std::size_t n) const { return snaps_[n]; }
  const GridSpec& grid() const { return snaps_[0].P.grid(); }
  const PhysicalConstants& constants() const noexcept { return c_; }

  /// Flow at snapshot n.
  FlowPoint at(std::size_t n, double x) const {
    const Fine& f = fine(n);
    const GridSpec& g = grid();
    const double h = g.length() / static_cast<double>(f.size);
    const double s = (g.wrap(x) - g.x_min()) / h;
    const double base = std::floor(s);
    const auto w = detail::lagrange6(s - base);
    const std::size_t i0 = static_cast<std::size_t>(base) % f.size;
    FlowPoint out;
    if (f.from_psi) {
      const cplx z = detail::interpolate6(f.a, i0, w);
      const cplx z1 = detail::interpolate6(f.b, i0, w);
      const cplx z2 = detail::interpolate6(f.c, i0, w);
      out.P = std::norm(z);
      if (!(out.P >= f.floor)) return out;
      const cplx q = z1 / z;
      out.v = c_.hbar / c_.mass * q.imag();
      out.div_v = c_.hbar / c_.mass * (z2 / z - q * q).imag();
    } else {
      out.P = detail::interpolate6(f.a, i0, w).real();
      if (!(out.P >= f.floor)) return out;
      out.v = detail::interpolate6(f.b, i0, w).real() / c_.mass;
      out.div_v = detail::interpolate6(f.c, i0, w).real() / c_.mass;
    }
    out.resolved = true;
    return out;
  }

  /// Flow at time t in [time(0), time(size - 1)], linear between snapshots.
  FlowPoint at_time(double t, double x) const {
    if (snaps_.size() == 1) return at(0, x);
    auto it = std::upper_bound(snaps_.begin(), snaps_.end(), t,
                               [](double v, const HydroState& s) { return v < s.time; });
    std::size_t n = static_cast<std::size_t>(it - snaps_.begin());
    n = std::clamp<std::size_t>(n, 1, snaps_.size() - 1) - 1;
    return between(n, t, x);
  }

  /// Flow at time t inside the interval [time(n), time(n + 1)].
  FlowPoint between(std::size_t n, double t, double x) const {
    const double theta = (t - snaps_[n].time) / (snaps_[n + 1].time - snaps_[n].time);
    const FlowPoint a = at(n, x);
    const FlowPoint b = at(n + 1, x);
    FlowPoint out;
    out.resolved = a.resolved && b.resolved;
    out.P = (1.0 - theta) * a.P + theta * b.P;
    out.v = (1.0 - theta) * a.v + theta * b.v;
    out.div_v = (1.0 - theta) * a.div_v + theta * b.div_v;
    return out;
  }

  /// Refined density of snapshot n, clipped at 0.
  std::vector<double> refined_density(std::size_t n) const {
    const Fine& f = fine(n);
    std::vector<double> p(f.size);
    for (std::size_t j = 0; j < f.size; ++j) {
      p[j] = std::max(f.from_psi ? std::norm(f.a[j]) : f.a[j].real(), 0.0);
    }
    return p;
  }

 private:
  struct Fine {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    std::size_t size = 0;
    bool from_psi = false;
    double floor = 0.0;
    std::vector<cplx> a, b, c;
  };

  const Fine& fine(std::size_t n) const {
    for (const auto& slot : cache_) {
      if (slot.index == n) return slot;
    }
    // Evict the slot farthest from n; empty slots count as infinitely far.
    const auto distance = [n](const Fine& f) {
      if (f.index == std::numeric_limits<std::size_t>::max()) return f.index;
      return f.index > n ? f.index - n : n - f.index;
    };
    Fine& slot = distance(cache_[0]) >= distance(cache_[1]) ? cache_[0] : cache_[1];
    const HydroState& st = snaps_[n];
    slot.index = n;
    slot.floor = kNodeFloor * max_value(st.P);
    const auto refined = [&](const auto& field) { return upsample(field, refine_).to_vector(); };
    const auto lift = [](const std::vector<double>& v) {
      return std::vector<cplx>(v.begin(), v.end());
    };
    if (st.psi) {
      slot.from_psi = true;
      slot.a = refined(*st.psi);
      slot.b = refined(differentiate(*st.psi, 1));
      slot.c = refined(differentiate(*st.psi, 2));
    } else {
      slot.from_psi = false;
      slot.a = lift(refined(st.P));
      slot.b = lift(refined(st.grad_S));
      slot.c = lift(refined(differentiate(st.grad_S, 1)));
    }
    slot.size = slot.a.size();
    return slot;
  }

  std::vector<HydroState> snaps_;
  PhysicalConstants c_;
  std::size_t refine_;
  mutable std::array<Fine, 2> cache_{};
};

/// v = grad S / m at x, band-limited.
inline double bohm_velocity(const HydroState& state, double x, const PhysicalConstants& c) {
  const FlowField flow({state}, c);
  const FlowPoint p = flow.at(0, x);
  if (!p.resolved) {
    throw NodeError(0, "density is below the node floor at x = " + std::to_string(x));
  }
  return p.v;
}

/// RK4 trajectories from every x0 through the whole snapshot sequence, with
/// steps no longer than dt. A trajectory that reaches the node floor stops
/// and is flagged. With record = false only the last sample is kept.
inline std::vector<Trajectory> integrate_trajectories(const FlowField& flow,
                                                      const std::vector<double>& x0s, double dt,
                                                      bool record = true) {
  if (!(dt > 0.0)) throw InvalidArgument("trajectory dt must be > 0");
  const GridSpec& g = flow.grid();
  std::vector<Trajectory> out(x0s.size());
  std::vector<double> x(x0s);
  std::vector<char> alive(x0s.size(), 1);

  const auto sample = [&](std::size_t i, double t, double xi, const FlowPoint& p) {
    TrajectorySample s{t, g.wrap(xi), p.v, p.P, p.div_v};
    if (record || out[i].samples.empty()) {
      out[i].samples.push_back(s);
    } else {
      out[i].samples.back() = s;
    }
  };

  for (std::size_t i = 0; i < x0s.size(); ++i) {
    out[i].x0 = x0s[i];
    const FlowPoint p = flow.at(0, x[i]);
    if (!p.resolved) {
      alive[i] = 0;
      out[i].truncated = true;
      out[i].truncation_time = flow.time(0);
      continue;
    }
    sample(i, flow.time(0), x[i], p);
  }

  for (std::size_t n = 0; n + 1 < flow.size(); ++n) {
    const double ta = flow.time(n);
    const double span = flow.time(n + 1) - ta;
    const auto n_sub = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(n_sub);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!alive[i]) continue;
      for (std::size_t k = 0; k < n_sub; ++k) {
        const double t = ta + static_cast<double>(k) * h;
        const double t_end = k + 1 == n_sub ? flow.time(n + 1) : t + h;
        const FlowPoint p1 = flow.between(n, t, x[i]);
        const FlowPoint p2 = flow.between(n, t + 0.5 * h, x[i] + 0.5 * h * p1.v);
        const FlowPoint p3 = flow.between(n, t + 0.5 * h, x[i] + 0.5 * h * p2.v);
        const FlowPoint p4 = flow.between(n, t_end, x[i] + h * p3.v);
        const double xn = x[i] + h / 6.0 * (p1.v + 2.0 * p2.v + 2.0 * p3.v + p4.v);
        const FlowPoint pn = flow.between(n, t_end, xn);
        if (!(p1.resolved && p2.resolved && p3.resolved && p4.resolved && pn.resolved)) {
          alive[i] = 0;
          out[i].truncated = true;
          out[i].truncation_time = t;
          break;
        }
        x[i] = xn;
        sample(i, t_end, xn, pn);
      }
    }
  }
  return out;
}

inline Trajectory integrate_trajectory(const FlowField& flow, double x0, double dt) {
  return integrate_trajectories(flow, {x0}, dt).front();
}

/// Relative deviation |P(x(t), t) - P(x0, t0) exp(-integral div v dt)| / P(x(t), t)
/// along the recorded path. P and div v are re-evaluated from the flow, so
/// any path can be checked; the time integral is a trapezoid over samples.
inline std::vector<double> path_density_check(const Trajectory& traj, const FlowField& flow) {
  std::vector<double> out;
  if (traj.samples.empty()) return out;
  double log_weight = 0.0;
  double p0 = 0.0, prev_div = 0.0, prev_t = 0.0;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    const FlowPoint p = flow.at_time(s.t, s.x);
    if (!p.resolved) break;
    if (i == 0) {
      p0 = p.P;
    } else {
      log_weight -= 0.5 * (s.t - prev_t) * (p.div_v + prev_div);
    }
    prev_div = p.div_v;
    prev_t = s.t;
    out.push_back(std::abs(p.P - p0 * std::exp(log_weight)) / p.P);
  }
  return out;
}

namespace detail {

/// Cumulative distribution of a periodic density sampled at n points from
/// x_min, piecewise linear in between. cdf[j] is the mass left of point j;
/// cdf[n] = 1.
inline std::vector<double> cumulative(const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::vector<double> cdf(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) cdf[j + 1] = cdf[j] + 0.5 * (p[j] + p[(j + 1) % n]);
  const double total = cdf[n];
  for (auto& v : cdf) v /= total;
  return cdf;
}

inline double cdf_at(const std::vector<double>& cdf, const GridSpec& g, double x) {
  const std::size_t n = cdf.size() - 1;
  const double h = g.length() / static_cast<double>(n);
  const double s = (g.wrap(x) - g.x_min()) / h;
  const auto j = std::min(static_cast<std::size_t>(s), n - 1);
  const double t = s - static_cast<double>(j);
  return (1.0 - t) * cdf[j] + t * cdf[j + 1];
}

inline double inverse_cdf(const std::vector<double>& cdf, const GridSpec& g, double u) {
  const std::size_t n = cdf.size() - 1;
  const double h = g.length() / static_cast<double>(n);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  std::size_t j = static_cast<std::size_t>(it - cdf.begin());
  j = std::clamp<std::size_t>(j, 1, n) - 1;
  const double width = cdf[j + 1] - cdf[j];
  const double t = width > 0.0 ? (u - cdf[j]) / width : 0.5;
  return g.x_min() + (static_cast<double>(j) + t) * h;
}

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// n positions drawn from the density of snapshot 0 by inverse CDF.
inline std::vector<double> sample_positions(const FlowField& flow, std::size_t n,
                                            std::uint64_t seed) {
  const auto cdf = detail::cumulative(flow.refined_density(0));
  std::mt19937_64 gen(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = detail::inverse_cdf(cdf, flow.grid(), detail::unit_uniform(gen));
  return x;
}

struct EquivarianceResult {
  double ks_distance = 0.0;
  std::size_t n_particles = 0;
  std::size_t n_excluded = 0;
  /// At most 1% of the trajectories were truncated.
  bool exclusions_ok = true;
};

/// Kolmogorov-Smirnov distance between the final positions of particles
/// sampled from P(., t0) and the density of the last snapshot.
inline EquivarianceResult ensemble_equivariance(const FlowField& flow, std::size_t n_particles,
                                                std::uint64_t seed, double dt) {
  EquivarianceResult res;
  res.n_particles = n_particles;
  if (n_particles == 0) return res;
  const auto x0 = sample_positions(flow, n_particles, seed);
  const auto traj = integrate_trajectories(flow, x0, dt, false);
  std::vector<double> final_x;
  for (const auto& t : traj) {
    if (t.truncated) {
      ++res.n_excluded;
    } else {
      final_x.push_back(t.samples.back().x);
    }
  }
  res.exclusions_ok = 100 * res.n_excluded <= n_particles;
  if (final_x.empty()) {
    res.ks_distance = 1.0;
    return res;
  }
  std::sort(final_x.begin(), final_x.end());
  const auto cdf = detail::cumulative(flow.refined_density(flow.size() - 1));
  const double m = static_cast<double>(final_x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < final_x.size(); ++i) {
    const double f = detail::cdf_at(cdf, flow.grid(), final_x[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  res.ks_distance = d;
  return res;
}

}  // namespace qhydro
