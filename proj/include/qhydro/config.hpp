#pragma once

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qhydro/error.hpp"
#include "qhydro/grid.hpp"
#include "qhydro/schrodinger.hpp"

// Run configuration: one JSON document, validated completely before any
// computation. Every key is optional except initial.kind; unknown keys are
// rejected. See README for the grammar.

namespace qhydro {

using json = nlohmann::json;

/// Invalid configuration. `field` is the JSON path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct KGPacketSpec {
  double sigma = 1.0;
  double x0 = 0.0;
  double k0 = 0.0;
};

using InitialSpec = std::variant<FreeGaussian, HoGround, HoCoherent, PlaneWave, StandingWave,
                                 KGPacketSpec>;

struct TrajectoryConfig {
  std::vector<double> starts;
  std::size_t n_particles = 0;
  double dt = 0.0;
  std::size_t refine = 8;
};

struct RunConfig {
  std::size_t n_points = 512;
  double length = 40.0;
  PhysicalConstants constants;
  PotentialSpec potential = NoPotential{};
  InitialSpec initial = FreeGaussian{};
  std::string solver = "spectral";
  double dt = 1e-3;
  std::size_t n_steps = 0;
  std::size_t snapshot_every = 1;
  std::string out_dir = "out";
  std::string format = "csv";
  std::uint64_t seed = 1;
  TrajectoryConfig trajectories;
  /// The document with every default filled in.
  json resolved;

  GridSpec grid() const { return GridSpec(n_points, length); }
};

namespace detail {

/// Reads typed values out of one JSON object and remembers which keys were used.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field(key), "must be finite");
    return d;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<long long>() < 0)) {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed = {}) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (fallback.empty()) throw ConfigError(field(key), "is required");
      return fallback;
    }
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    std::string s = v.get<std::string>();
    if (!allowed.empty()) {
      bool ok = false;
      std::string list;
      for (const auto& a : allowed) {
        ok = ok || a == s;
        list += (list.empty() ? "" : ", ") + a;
      }
      if (!ok) throw ConfigError(field(key), "unknown value \"" + s + "\" (expected one of " + list + ")");
    }
    return s;
  }

  std::vector<double> numbers(const std::string& key) {
    used_.insert(key);
    std::vector<double> out;
    if (!j_.contains(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::optional<ObjectReader> object(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return ObjectReader(j_.at(key), field(key));
  }

  /// Rejects every key that was never asked for.
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(field(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline json empty_object() { return json::object(); }

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Validates a parsed document and fills in defaults.
inline RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  detail::ObjectReader top(doc, "");
  json& res = cfg.resolved;

  {
    const json blank = detail::empty_object();
    auto r = top.object("grid");
    detail::ObjectReader g = r ? *r : detail::ObjectReader(blank, "grid");
    const auto n = g.count("n_points", 512);
    cfg.length = g.number("length", 40.0);
    if (n < 4 || (n & (n - 1)) != 0) {
      throw ConfigError("grid.n_points", "must be a power of two >= 4");
    }
    if (!(cfg.length > 0.0)) throw ConfigError("grid.length", "must be > 0");
    cfg.n_points = static_cast<std::size_t>(n);
    g.finish();
    res["grid"] = {{"n_points", cfg.n_points}, {"length", cfg.length}};
  }

  {
    const json blank = detail::empty_object();
    auto r = top.object("constants");
    detail::ObjectReader k = r ? *r : detail::ObjectReader(blank, "constants");
    cfg.constants.hbar = k.number("hbar", 1.0);
    cfg.constants.mass = k.number("mass", 1.0);
    cfg.constants.c = k.number("c", 1.0);
    k.finish();
    if (!(cfg.constants.hbar > 0.0)) throw ConfigError("constants.hbar", "must be > 0");
    if (!(cfg.constants.mass >= 0.0)) throw ConfigError("constants.mass", "must be >= 0");
    if (!(cfg.constants.c > 0.0)) throw ConfigError("constants.c", "must be > 0");
    res["constants"] = {
        {"hbar", cfg.constants.hbar}, {"mass", cfg.constants.mass}, {"c", cfg.constants.c}};
  }

  {
    const json blank = detail::empty_object();
    auto r = top.object("potential");
    detail::ObjectReader p = r ? *r : detail::ObjectReader(blank, "potential");
    const std::string kind = p.text("kind", "none", {"none", "harmonic", "polynomial"});
    if (kind == "none") {
      cfg.potential = NoPotential{};
      res["potential"] = {{"kind", kind}};
    } else if (kind == "harmonic") {
      HarmonicPotential h;
      h.omega = p.number("omega", 1.0);
      h.center = p.number("center", 0.0);
      if (!(h.omega > 0.0)) throw ConfigError("potential.omega", "must be > 0");
      cfg.potential = h;
      res["potential"] = {{"kind", kind}, {"omega", h.omega}, {"center", h.center}};
    } else {
      if (!p.has("coefficients")) throw ConfigError("potential.coefficients", "is required");
      PolynomialPotential poly{p.numbers("coefficients")};
      cfg.potential = poly;
      res["potential"] = {{"kind", kind}, {"coefficients", poly.coefficients}};
    }
    p.finish();
  }

  cfg.solver = top.text("solver", "spectral", {"spectral", "hydro", "kg", "both"});
  res["solver"] = cfg.solver;

  {
    if (!top.has("initial")) throw ConfigError("initial", "is required");
    detail::ObjectReader in(top.raw("initial"), "initial");
    const std::string kind =
        in.text("kind", "", {"free_gaussian", "ho_ground", "ho_coherent", "plane_wave",
                             "standing_wave", "kg_packet"});
    json& ri = res["initial"];
    ri["kind"] = kind;
    if (kind == "free_gaussian") {
      FreeGaussian f;
      f.sigma0 = in.number("sigma0", 1.0);
      f.x0 = in.number("x0", 0.0);
      f.k0 = in.number("k0", 0.0);
      if (!(f.sigma0 > 0.0)) throw ConfigError("initial.sigma0", "must be > 0");
      cfg.initial = f;
      ri.update({{"sigma0", f.sigma0}, {"x0", f.x0}, {"k0", f.k0}});
    } else if (kind == "ho_ground" || kind == "ho_coherent") {
      const double omega = in.number("omega", 1.0);
      const double center = in.number("center", 0.0);
      if (!(omega > 0.0)) throw ConfigError("initial.omega", "must be > 0");
      ri.update({{"omega", omega}, {"center", center}});
      if (kind == "ho_ground") {
        cfg.initial = HoGround{omega, 0.0, center};
      } else {
        const double x0 = in.number("x0", 1.0);
        cfg.initial = HoCoherent{omega, x0, 0.0, center};
        ri["x0"] = x0;
      }
    } else if (kind == "plane_wave" || kind == "standing_wave") {
      const double k = in.number("k", 0.0);
      const double cycles = k * cfg.length / (2.0 * std::numbers::pi);
      if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, std::abs(cycles))) {
        throw ConfigError("initial.k", "must be a multiple of 2 pi / grid.length");
      }
      if (kind == "plane_wave") {
        cfg.initial = PlaneWave{k, 0.0};
      } else {
        cfg.initial = StandingWave{k};
      }
      ri["k"] = k;
    } else {
      KGPacketSpec g;
      g.sigma = in.number("sigma", 1.0);
      g.x0 = in.number("x0", 0.0);
      g.k0 = in.number("k0", 0.0);
      if (!(g.sigma > 0.0)) throw ConfigError("initial.sigma", "must be > 0");
      cfg.initial = g;
      ri.update({{"sigma", g.sigma}, {"x0", g.x0}, {"k0", g.k0}});
    }
    in.finish();
  }

  {
    const json blank = detail::empty_object();
    auto r = top.object("time");
    detail::ObjectReader t = r ? *r : detail::ObjectReader(blank, "time");
    cfg.dt = t.number("dt", 1e-3);
    cfg.n_steps = static_cast<std::size_t>(t.count("n_steps", 0));
    cfg.snapshot_every = static_cast<std::size_t>(t.count("snapshot_every", 1));
    t.finish();
    if (!(cfg.dt > 0.0)) throw ConfigError("time.dt", "must be > 0");
    if (cfg.snapshot_every == 0) throw ConfigError("time.snapshot_every", "must be >= 1");
    res["time"] = {{"dt", cfg.dt}, {"n_steps", cfg.n_steps}, {"snapshot_every", cfg.snapshot_every}};
  }

  {
    const json blank = detail::empty_object();
    auto r = top.object("output");
    detail::ObjectReader o = r ? *r : detail::ObjectReader(blank, "output");
    cfg.out_dir = o.text("directory", "out");
    cfg.format = o.text("format", "csv", {"csv", "json"});
    o.finish();
    res["output"] = {{"directory", cfg.out_dir}, {"format", cfg.format}};
  }

  cfg.seed = top.count("seed", 1);
  res["seed"] = cfg.seed;

  {
    const json blank = detail::empty_object();
    auto r = top.object("trajectories");
    detail::ObjectReader t = r ? *r : detail::ObjectReader(blank, "trajectories");
    cfg.trajectories.starts = t.numbers("starts");
    cfg.trajectories.n_particles = static_cast<std::size_t>(t.count("n_particles", 0));
    cfg.trajectories.dt = t.number("dt", cfg.dt);
    cfg.trajectories.refine = static_cast<std::size_t>(t.count("refine", 8));
    t.finish();
    if (!(cfg.trajectories.dt > 0.0)) throw ConfigError("trajectories.dt", "must be > 0");
    const auto f = cfg.trajectories.refine;
    if (f == 0 || (f & (f - 1)) != 0) {
      throw ConfigError("trajectories.refine", "must be a power of two");
    }
    res["trajectories"] = {{"starts", cfg.trajectories.starts},
                           {"n_particles", cfg.trajectories.n_particles},
                           {"dt", cfg.trajectories.dt},
                           {"refine", cfg.trajectories.refine}};
  }
  top.finish();

  const bool kg_initial = std::holds_alternative<KGPacketSpec>(cfg.initial);
  if (cfg.solver == "kg") {
    if (!std::holds_alternative<NoPotential>(cfg.potential)) {
      throw ConfigError("potential.kind", "the Klein-Gordon solver is free-particle only");
    }
    if (!(kg_initial || std::holds_alternative<PlaneWave>(cfg.initial) ||
          std::holds_alternative<StandingWave>(cfg.initial))) {
      throw ConfigError("initial.kind",
                        "solver kg takes kg_packet, plane_wave or standing_wave");
    }
  } else {
    if (kg_initial) throw ConfigError("initial.kind", "kg_packet needs solver kg");
    if (!(cfg.constants.mass > 0.0)) throw ConfigError("constants.mass", "must be > 0");
  }
  return cfg;
}

/// Parses JSON text; syntax errors name the line and column.
inline RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "invalid JSON at " + detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Initial wave field of a non-relativistic run.
inline WaveField initial_wave(const RunConfig& cfg) {
  return std::visit(
      [&](const auto& s) -> WaveField {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, KGPacketSpec>) {
          throw ConfigError("initial.kind", "kg_packet needs solver kg");
        } else {
          return oracle_state(s, cfg.grid(), cfg.constants);
        }
      },
      cfg.initial);
}

}  // namespace qhydro
