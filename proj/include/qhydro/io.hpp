#pragma once

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qhydro/config.hpp"
#include "qhydro/error.hpp"
#include "qhydro/field.hpp"
#include "qhydro/klein_gordon.hpp"
#include "qhydro/madelung.hpp"
#include "qhydro/report.hpp"
#include "qhydro/schrodinger.hpp"
#include "qhydro/support.hpp"
#include "qhydro/trajectories.hpp"

// Snapshot sets on disk. A set is a directory with manifest.json and one file
// per snapshot, snapshot_NNNNN.csv or .json. CSV: header row, comma
// delimiter, '.' decimal, 17 significant digits.

namespace qhydro {

namespace fs = std::filesystem;

/// Named columns of equal length, in output order.
struct Columns {
  std::vector<std::string> names;
  std::vector<std::vector<double>> data;

  void add(std::string name, std::vector<double> values) {
    names.push_back(std::move(name));
    data.push_back(std::move(values));
  }

  const std::vector<double>& get(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return data[i];
    }
    throw Error("snapshot has no column " + name);
  }

  bool has(const std::string& name) const {
    for (const auto& n : names) {
      if (n == name) return true;
    }
    return false;
  }
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Non-finite values become null.
inline json to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(to_json(x));
  return a;
}

/// Scalars and series as flat keys; verdicts and notes as nested objects.
inline json to_json(const DiagnosticsReport& rep) {
  json j = json::object();
  for (const auto& [k, v] : rep.scalars) j[k] = to_json(v);
  for (const auto& [k, v] : rep.series) j[k] = to_json(v);
  if (!rep.verdicts.empty()) j["verdicts"] = rep.verdicts;
  if (!rep.notes.empty()) j["notes"] = rep.notes;
  return j;
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::string to_csv(const Columns& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.names.size(); ++i) {
    out += (i ? "," : "") + cols.names[i];
  }
  out += "\n";
  const std::size_t rows = cols.data.empty() ? 0 : cols.data[0].size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < cols.data.size(); ++i) {
      if (i) out += ',';
      out += format_double(cols.data[i][r]);
    }
    out += '\n';
  }
  return out;
}

inline Columns parse_csv(const std::string& text, const std::string& origin) {
  Columns cols;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(origin + ": empty CSV");
  {
    std::istringstream hs(line);
    std::string name;
    while (std::getline(hs, name, ',')) cols.add(name, {});
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ls, cell, ',')) {
      if (i >= cols.data.size()) throw Error(origin + ": too many cells in row " + std::to_string(row));
      try {
        std::size_t used = 0;
        cols.data[i].push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(origin + ": bad number \"" + cell + "\" in row " + std::to_string(row));
      }
      ++i;
    }
    if (i != cols.data.size()) throw Error(origin + ": too few cells in row " + std::to_string(row));
  }
  return cols;
}

inline json columns_to_json(double time, const Columns& cols) {
  json j;
  j["time"] = time;
  json c = json::object();
  for (std::size_t i = 0; i < cols.names.size(); ++i) c[cols.names[i]] = cols.data[i];
  j["columns"] = c;
  j["order"] = cols.names;
  return j;
}

inline Columns columns_from_json(const json& j, const std::string& origin) {
  Columns cols;
  try {
    for (const auto& name : j.at("order")) {
      const std::string n = name.get<std::string>();
      cols.add(n, j.at("columns").at(n).get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw Error(origin + ": malformed snapshot (" + e.what() + ")");
  }
  return cols;
}

// ---------------------------------------------------------------------------
// Snapshot columns

namespace detail {

inline std::vector<double> grid_x(const GridSpec& g) {
  std::vector<double> x(g.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = g.x(j);
  return x;
}

/// u and Q on the support of p, 0 elsewhere and for m = 0. Tolerates nodes.
inline std::pair<std::vector<double>, std::vector<double>> osmotic_and_q(
    const ScalarField& p, const PhysicalConstants& c) {
  const std::size_t n = p.size();
  if (!(c.mass > 0.0)) return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const Support s = support_of(p);
  const ScalarField dp = differentiate(p, 1);
  const ScalarField q = quantum_potential_on(p, s, c);
  std::vector<double> u(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (s.contains(j)) u[j] = c.hbar / (2.0 * c.mass) * dp[j] / p[j];
  }
  return {u, q.to_vector()};
}

}  // namespace detail

/// x, P, S, u, Q, re_psi, im_psi for a wave field. S defaults to the
/// unwrapped phase of psi.
inline Columns wave_columns(const WaveField& psi, const PhysicalConstants& c,
                            const ScalarField* action = nullptr) {
  const ScalarField p = density(psi);
  Columns cols;
  cols.add("x", detail::grid_x(psi.grid()));
  cols.add("P", p.to_vector());
  cols.add("S", action ? action->to_vector() : decompose_lenient(psi, c).S.to_vector());
  auto [u, q] = detail::osmotic_and_q(p, c);
  cols.add("u", std::move(u));
  cols.add("Q", std::move(q));
  std::vector<double> re(psi.size()), im(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    re[j] = psi[j].real();
    im[j] = psi[j].imag();
  }
  cols.add("re_psi", std::move(re));
  cols.add("im_psi", std::move(im));
  return cols;
}

/// The wave columns plus dSdt, M_eff, re_dpsi_dt, im_dpsi_dt.
inline Columns kg_columns(const KGState& st, const PhysicalConstants& c) {
  Columns cols = wave_columns(st.Psi, c);
  const ScalarField p = density(st.Psi);
  const Support s = support_of(p);
  const WaveField dx = differentiate(st.Psi, 1);
  const std::size_t n = p.size();
  std::vector<double> dsdt(n, 0.0), m(n, 0.0), re(n), im(n);
  for (std::size_t j = 0; j < n; ++j) {
    re[j] = st.dPsi_dt[j].real();
    im[j] = st.dPsi_dt[j].imag();
    if (!s.contains(j)) continue;
    dsdt[j] = c.hbar * (std::conj(st.Psi[j]) * st.dPsi_dt[j]).imag() / p[j];
    const double dsdx = c.hbar * (std::conj(st.Psi[j]) * dx[j]).imag() / p[j];
    const double inv = dsdt[j] * dsdt[j] / (c.c * c.c) - dsdx * dsdx;
    if (inv > 0.0) m[j] = std::sqrt(inv) / c.c;
  }
  cols.add("dSdt", std::move(dsdt));
  cols.add("M_eff", std::move(m));
  cols.add("re_dpsi_dt", std::move(re));
  cols.add("im_dpsi_dt", std::move(im));
  return cols;
}

// ---------------------------------------------------------------------------
// Snapshot sets

inline json grid_json(const GridSpec& g) {
  return {{"n_points", g.size()}, {"length", g.length()}, {"x_min", g.x_min()}};
}

inline json constants_json(const PhysicalConstants& c) {
  return {{"hbar", c.hbar}, {"mass", c.mass}, {"c", c.c}};
}

inline std::string snapshot_name(std::size_t index, const std::string& format) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%05zu.", index);
  return buf + format;
}

/// Writes one set. `meta` is merged into the manifest (solver, potential, ...).
inline void write_snapshot_set(const fs::path& dir, const std::string& format,
                               const GridSpec& grid, const PhysicalConstants& c, json meta,
                               const std::vector<std::pair<double, Columns>>& snapshots) {
  fs::create_directories(dir);
  json manifest = std::move(meta);
  manifest["format"] = format;
  manifest["grid"] = grid_json(grid);
  manifest["constants"] = constants_json(c);
  json list = json::array();
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const std::string name = snapshot_name(i, format);
    const auto& [t, cols] = snapshots[i];
    if (format == "csv") {
      write_text(dir / name, to_csv(cols));
    } else {
      write_json(dir / name, columns_to_json(t, cols));
    }
    list.push_back({{"index", i}, {"time", t}, {"file", name}});
  }
  manifest["snapshots"] = list;
  write_json(dir / "manifest.json", manifest);
}

struct SnapshotSet {
  json manifest;
  GridSpec grid{4, 1.0};
  PhysicalConstants constants;
  PotentialSpec potential = NoPotential{};
  std::vector<double> times;
  std::vector<Columns> columns;

  WaveField psi(std::size_t n) const {
    const auto& re = columns[n].get("re_psi");
    const auto& im = columns[n].get("im_psi");
    std::vector<cplx> v(re.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = cplx(re[j], im[j]);
    return WaveField(grid, std::move(v));
  }

  bool is_kg() const { return !columns.empty() && columns[0].has("re_dpsi_dt"); }

  KGState kg_state(std::size_t n) const {
    const auto& re = columns[n].get("re_dpsi_dt");
    const auto& im = columns[n].get("im_dpsi_dt");
    std::vector<cplx> v(re.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = cplx(re[j], im[j]);
    return {psi(n), WaveField(grid, std::move(v)), times[n]};
  }
};

inline PotentialSpec potential_from_json(const json& j) {
  const std::string kind = j.value("kind", "none");
  if (kind == "none") return NoPotential{};
  if (kind == "harmonic") return HarmonicPotential{j.at("omega").get<double>(), j.value("center", 0.0)};
  if (kind == "polynomial") return PolynomialPotential{j.at("coefficients").get<std::vector<double>>()};
  throw Error("unknown potential kind " + kind);
}

inline SnapshotSet read_snapshot_set(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("snapshot directory " + dir.string() + " does not exist");
  if (!fs::exists(dir / "manifest.json")) {
    throw Error("snapshot directory " + dir.string() + " has no manifest.json");
  }
  SnapshotSet set;
  try {
    set.manifest = json::parse(read_text(dir / "manifest.json"));
    const json& g = set.manifest.at("grid");
    set.grid = GridSpec(g.at("n_points").get<std::size_t>(), g.at("length").get<double>(),
                        g.at("x_min").get<double>());
    const json& c = set.manifest.at("constants");
    set.constants.hbar = c.at("hbar").get<double>();
    set.constants.mass = c.at("mass").get<double>();
    set.constants.c = c.at("c").get<double>();
    if (set.manifest.contains("potential")) set.potential = potential_from_json(set.manifest["potential"]);
    const std::string format = set.manifest.at("format").get<std::string>();
    for (const auto& entry : set.manifest.at("snapshots")) {
      const fs::path file = dir / entry.at("file").get<std::string>();
      const std::string text = read_text(file);
      set.times.push_back(entry.at("time").get<double>());
      set.columns.push_back(format == "csv" ? parse_csv(text, file.string())
                                            : columns_from_json(json::parse(text), file.string()));
      if (set.columns.back().get("re_psi").size() != set.grid.size()) {
        throw Error(file.string() + ": expected " + std::to_string(set.grid.size()) + " rows");
      }
    }
  } catch (const json::exception& e) {
    throw Error("malformed snapshot set in " + dir.string() + ": " + e.what());
  }
  if (set.times.empty()) throw Error("snapshot directory " + dir.string() + " has no snapshots");
  return set;
}

/// t, x, v, P_at_x
inline std::string trajectory_csv(const Trajectory& t) {
  Columns cols;
  std::vector<double> ts, xs, vs, ps;
  for (const auto& s : t.samples) {
    ts.push_back(s.t);
    xs.push_back(s.x);
    vs.push_back(s.v);
    ps.push_back(s.P);
  }
  cols.add("t", ts);
  cols.add("x", xs);
  cols.add("v", vs);
  cols.add("P_at_x", ps);
  return to_csv(cols);
}

}  // namespace qhydro
