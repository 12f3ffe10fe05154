#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/field.hpp"

// Where a density is resolved. Points with P >= floor * max(P) form the
// support; the rest is vacuum. A localized packet has one support arc and
// one vacuum arc touching it from both sides. A node is any additional
// below-floor arc, i.e. a gap inside the support. Isolated islands whose
// peak stays below kIslandLevel * max(P) are debris at the edge of a
// numerically evolved packet and count as vacuum.

namespace qhydro {

/// Relative node floor: P < kNodeFloor * max(P) counts as vacuum.
inline constexpr double kNodeFloor = 1e-12;
/// Support arcs peaking below kIslandLevel * max(P) are treated as vacuum.
inline constexpr double kIslandLevel = 1e-9;

struct Arc {
  std::size_t begin = 0;   // first index
  std::size_t length = 0;  // number of points, walking forward cyclically
};

struct Support {
  std::vector<char> inside;
  double floor = 0.0;
  double p_max = 0.0;

  std::size_t size() const noexcept { return inside.size(); }
  bool contains(std::size_t j) const noexcept { return inside[j] != 0; }
  bool full() const noexcept {
    return std::all_of(inside.begin(), inside.end(), [](char c) { return c != 0; });
  }
};

/// Maximal cyclic runs of points with inside == want.
inline std::vector<Arc> arcs(const Support& s, bool want) {
  const std::size_t n = s.size();
  std::vector<Arc> out;
  const auto match = [&](std::size_t j) { return (s.inside[j % n] != 0) == want; };
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) count += match(j) ? 1 : 0;
  if (count == 0) return out;
  if (count == n) return {Arc{0, n}};
  // Start at a non-matching point so that no run is split by the seam.
  std::size_t start = 0;
  while (match(start)) ++start;
  std::size_t off = 1;
  while (off <= n) {
    if (!match(start + off)) {
      ++off;
      continue;
    }
    Arc a{(start + off) % n, 0};
    while (off <= n && match(start + off)) {
      ++a.length;
      ++off;
    }
    out.push_back(a);
  }
  return out;
}

inline Support support_of(const ScalarField& p, double rel_floor = kNodeFloor) {
  const double p_max = max_value(p);
  if (!(p_max > 0.0)) throw DegenerateDensity("density is nowhere positive");
  Support s;
  s.p_max = p_max;
  s.floor = rel_floor * p_max;
  s.inside.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) s.inside[j] = p[j] >= s.floor ? 1 : 0;
  const double island = std::max(rel_floor, kIslandLevel) * p_max;
  for (const Arc& a : arcs(s, true)) {
    double peak = 0.0;
    for (std::size_t off = 0; off < a.length; ++off) peak = std::max(peak, p[(a.begin + off) % p.size()]);
    if (peak >= island) continue;
    for (std::size_t off = 0; off < a.length; ++off) s.inside[(a.begin + off) % p.size()] = 0;
  }
  return s;
}

/// First grid index of a node, if the support has a gap. The longest vacuum
/// arc is the exterior of the packet; every other vacuum arc is a node.
inline std::optional<std::size_t> find_node(const Support& s) {
  auto gaps = arcs(s, false);
  if (gaps.size() <= 1) return std::nullopt;
  auto longest = std::max_element(gaps.begin(), gaps.end(),
                                   [](const Arc& a, const Arc& b) { return a.length < b.length; });
  for (const auto& g : gaps) {
    if (&g != &*longest) {
      // Report the deepest point of the gap.
      return (g.begin + g.length / 2) % s.size();
    }
  }
  return std::nullopt;
}

inline Support require_node_free(const ScalarField& p, double rel_floor = kNodeFloor) {
  Support s = support_of(p, rel_floor);
  if (auto node = find_node(s)) {
    throw NodeError(*node, "density has a node at grid index " + std::to_string(*node) + " (x = " +
                               std::to_string(p.grid().x(*node)) + ")");
  }
  return s;
}

/// Smooth weight over the decades of P / max P:
///   w = erfc(-(log10(P / max P) - mid_log10) / width_log10) / 2,
/// set to exactly 0 below the node floor. For a smooth density log P is
/// smooth, so w is an analytic, spectrally resolved function of x.
inline ScalarField blend_weight(const ScalarField& p, double mid_log10 = -6.0,
                                double width_log10 = 1.0) {
  const double p_max = max_value(p);
  if (!(p_max > 0.0)) throw DegenerateDensity("density is nowhere positive");
  const double floor = kNodeFloor * p_max;
  return p.map([=](double v) {
    if (!(v >= floor)) return 0.0;
    return 0.5 * std::erfc(-(std::log10(v / p_max) - mid_log10) / width_log10);
  });
}

/// Density-weighted rms of r over the support: sqrt(sum P r^2 / sum P).
inline double weighted_rms(const ScalarField& r, const ScalarField& p, const Support& s) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (!s.contains(j)) continue;
    num += p[j] * r[j] * r[j];
    den += p[j];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

/// max |r| over the support.
inline double support_max_abs(const ScalarField& r, const Support& s) {
  double m = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (s.contains(j)) m = std::max(m, std::abs(r[j]));
  }
  return m;
}

}  // namespace qhydro
