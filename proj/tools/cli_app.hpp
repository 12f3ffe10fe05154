#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qhydro/qhydro.hpp"

namespace qhydro::cli {

enum ExitCode : int { kOk = 0, kRuntime = 1, kConfig = 2 };

struct Options {
  std::string config;
  std::string out;
  std::string snapshots;
  bool quiet = false;
};

class Runner {
 public:
  Runner(const Options& opt, std::ostream& out) : opt_(opt), out_(out) {}

  int evolve(std::optional<std::string> force_solver = std::nullopt) {
    const RunConfig cfg = load(force_solver);
    const fs::path root = opt_.out.empty() ? fs::path(cfg.out_dir) : fs::path(opt_.out);
    fs::create_directories(root);
    const auto start = std::chrono::steady_clock::now();

    json summary;
    summary["config"] = cfg.resolved;
    summary["status"] = "ok";
    int code = kOk;
    const GridSpec grid = cfg.grid();
    const PhysicalConstants& c = cfg.constants;
    json meta = {{"potential", cfg.resolved["potential"]},
                 {"dt", cfg.dt},
                 {"snapshot_every", cfg.snapshot_every}};

    if (cfg.solver == "kg") {
      code = run_kg(cfg, root, meta, summary);
    } else {
      const ScalarField v = evaluate_potential(cfg.potential, grid, c);
      const WaveField psi0 = initial_wave(cfg);
      const bool localized = !std::holds_alternative<PlaneWave>(cfg.initial) &&
                             !std::holds_alternative<StandingWave>(cfg.initial);
      if (localized && boundary_mass(density(psi0)) > 1e-8) {
        summary["warnings"] = {"the initial state has not decayed at the grid edges; the periodic images interact"};
      }
      std::vector<WaveSnapshot> spectral;
      std::vector<HydroState> hydro;
      if (cfg.solver == "spectral") {
        spectral = qhydro::evolve(psi0, v, c, cfg.dt, cfg.n_steps, cfg.snapshot_every);
      } else if (cfg.solver == "hydro") {
        code = run_hydro(psi0, v, cfg, hydro, summary);
      } else {
        const DiagnosticsReport rep =
            cross_validate(psi0, v, c, cfg.dt, cfg.n_steps, cfg.snapshot_every, &spectral, &hydro);
        summary["cross_validation"] = to_json(rep);
        if (!rep.verdict("completed")) {
          summary["status"] = "node_error";
          summary["message"] = rep.notes.at("failure");
          code = kRuntime;
        }
      }
      if (!spectral.empty()) {
        write_wave_set(root / "spectral", "spectral", cfg, meta, spectral, v, summary);
      }
      if (!hydro.empty()) write_hydro_set(root / "hydro", cfg, meta, hydro, summary);
    }

    write_json(root / "summary.json", summary);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_json(root / "timing.json", {{"command", "evolve"}, {"wall_seconds", secs}});
    info("wrote " + (root / "summary.json").string());
    if (code != kOk) std::cerr << "error: " << summary.value("message", "run failed") << "\n";
    return code;
  }

  int audit(const std::string& dir, bool uncertainty_only) {
    const SnapshotSet set = read_snapshot_set(dir);
    json report;
    report["snapshot_dir"] = dir;
    report["n_snapshots"] = set.times.size();
    report["times"] = set.times;
    const PhysicalConstants& c = set.constants;
    if (set.is_kg()) {
      if (uncertainty_only) throw Error("uncertainty needs a non-relativistic snapshot set");
      audit_kg(set, report);
    } else {
      std::vector<HydroState> states;
      for (std::size_t n = 0; n < set.times.size(); ++n) {
        states.push_back(decompose(set.psi(n), c, set.times[n], WindingPolicy::allow));
      }
      if (!uncertainty_only) {
        const ScalarField v = evaluate_potential(set.potential, set.grid, c);
        if (states.size() >= 2) {
          report.update(to_json(audit_series(states, v, c)));
        } else {
          std::vector<double> ortho, rms;
          for (const auto& st : states) {
            ortho.push_back(orthogonality_integral(st, c));
            rms.push_back(rms_fluctuation(st, c));
          }
          report["orthogonality_integral"] = ortho;
          report["rms_fluctuation"] = rms;
          report["notes"] = {{"residuals", "time derivatives need at least 2 snapshots"}};
        }
      }
      json block = json::array();
      bool all_hold = true;
      for (std::size_t n = 0; n < states.size(); ++n) {
        json entry;
        try {
          entry = to_json(heisenberg_report(set.psi(n), c));
          for (const auto& [k, ok] : entry["verdicts"].items()) all_hold = all_hold && ok.get<bool>();
        } catch (const DegenerateDensity& e) {
          entry["notes"] = {{"skipped", e.what()}};
        }
        entry["time"] = set.times[n];
        block.push_back(entry);
      }
      report["uncertainty"] = block;
      report["uncertainty_verdicts_hold"] = all_hold;
    }
    emit(report, uncertainty_only ? "uncertainty.json" : "audit.json");
    return kOk;
  }

  int trajectories() {
    const RunConfig cfg = load(std::nullopt);
    const fs::path dir = opt_.snapshots.empty() ? fs::path(cfg.out_dir) / "spectral"
                                                : fs::path(opt_.snapshots);
    const fs::path root =
        opt_.out.empty() ? fs::path(cfg.out_dir) / "trajectories" : fs::path(opt_.out);
    const SnapshotSet set = read_snapshot_set(dir);
    std::vector<HydroState> states;
    for (std::size_t n = 0; n < set.times.size(); ++n) {
      states.push_back(decompose_lenient(set.psi(n), set.constants, set.times[n]));
    }
    const FlowField flow(std::move(states), set.constants, cfg.trajectories.refine);
    const double dt = cfg.trajectories.dt;
    fs::create_directories(root);

    json summary;
    summary["config"] = cfg.resolved;
    summary["snapshot_dir"] = dir.string();
    json list = json::array();
    for (std::size_t i = 0; i < cfg.trajectories.starts.size(); ++i) {
      const Trajectory t = integrate_trajectory(flow, cfg.trajectories.starts[i], dt);
      char name[40];
      std::snprintf(name, sizeof name, "trajectory_%03zu.csv", i);
      write_text(root / name, trajectory_csv(t));
      json e = {{"x0", t.x0}, {"file", name}, {"truncated", t.truncated}};
      if (t.truncated) e["truncation_time"] = t.truncation_time;
      if (!t.samples.empty()) {
        e["final_t"] = t.samples.back().t;
        e["final_x"] = t.samples.back().x;
        double worst = 0.0;
        for (double d : path_density_check(t, flow)) worst = std::max(worst, d);
        e["max_path_density_deviation"] = to_json(worst);
      }
      list.push_back(e);
    }
    summary["trajectories"] = list;
    int code = kOk;
    if (cfg.trajectories.n_particles > 0) {
      const auto res = ensemble_equivariance(flow, cfg.trajectories.n_particles, cfg.seed, dt);
      summary["ensemble"] = {{"n_particles", res.n_particles},
                             {"seed", cfg.seed},
                             {"ks_distance", res.ks_distance},
                             {"n_excluded", res.n_excluded},
                             {"exclusions_ok", res.exclusions_ok}};
      if (!res.exclusions_ok) {
        std::cerr << "error: more than 1% of the ensemble trajectories were truncated\n";
        code = kRuntime;
      }
    } else {
      summary["ensemble"] = json::object();
    }
    write_json(root / "trajectories_summary.json", summary);
    info("wrote " + (root / "trajectories_summary.json").string());
    return code;
  }

 private:
  RunConfig load(const std::optional<std::string>& force_solver) const {
    if (opt_.config.empty()) throw ConfigError("--config", "is required");
    if (!force_solver) return load_config(opt_.config);
    std::ifstream in(opt_.config);
    if (!in) throw ConfigError("", "cannot open config file " + opt_.config);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("", "invalid JSON at " +
                                detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    if (doc.is_object()) doc["solver"] = *force_solver;
    return parse_config(doc);
  }

  void info(const std::string& line) {
    if (!opt_.quiet) out_ << line << "\n";
  }

  void emit(const json& report, const std::string& name) {
    if (opt_.out.empty()) {
      out_ << report.dump(2) << "\n";
      return;
    }
    fs::create_directories(opt_.out);
    write_json(fs::path(opt_.out) / name, report);
    info("wrote " + (fs::path(opt_.out) / name).string());
  }

  int run_hydro(const WaveField& psi0, const ScalarField& v, const RunConfig& cfg,
                std::vector<HydroState>& out, json& summary) {
    HydroSolver solver(v, cfg.constants, cfg.dt);
    HydroState st = prepare_hydro_state(decompose(psi0, cfg.constants, 0.0));
    out.push_back(st);
    for (std::size_t k = 1; k <= cfg.n_steps; ++k) {
      try {
        st = solver.step(st);
      } catch (const NodeError& e) {
        summary["status"] = "node_error";
        summary["message"] = e.what();
        summary["failure_time"] = static_cast<double>(k) * cfg.dt;
        return kRuntime;
      }
      if (k % cfg.snapshot_every == 0) out.push_back(st);
    }
    return kOk;
  }

  void write_wave_set(const fs::path& dir, const std::string& solver, const RunConfig& cfg,
                      json meta, const std::vector<WaveSnapshot>& snaps, const ScalarField& v,
                      json& summary) {
    std::vector<std::pair<double, Columns>> rows;
    std::vector<double> norm_drift;
    const double e0 = energy(snaps.front().psi, v, cfg.constants);
    double energy_drift = 0.0;
    for (const auto& s : snaps) {
      rows.emplace_back(s.time, wave_columns(s.psi, cfg.constants));
      norm_drift.push_back(norm2(s.psi) - 1.0);
      const double e = energy(s.psi, v, cfg.constants);
      energy_drift = std::max(energy_drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    }
    meta["solver"] = solver;
    write_snapshot_set(dir, cfg.format, cfg.grid(), cfg.constants, meta, rows);
    double worst = 0.0;
    for (double d : norm_drift) worst = std::max(worst, std::abs(d));
    summary[solver] = {{"n_snapshots", snaps.size()},
                       {"norm_drift", to_json(norm_drift)},
                       {"max_norm_drift", worst},
                       {"max_relative_energy_drift", energy_drift}};
  }

  void write_hydro_set(const fs::path& dir, const RunConfig& cfg, json meta,
                       const std::vector<HydroState>& states, json& summary) {
    std::vector<std::pair<double, Columns>> rows;
    std::vector<double> mass;
    for (const auto& st : states) {
      rows.emplace_back(st.time, wave_columns(compose(st, cfg.constants), cfg.constants, &st.S));
      mass.push_back(integrate(st.P) - 1.0);
    }
    meta["solver"] = "hydro";
    write_snapshot_set(dir, cfg.format, cfg.grid(), cfg.constants, meta, rows);
    summary["hydro"] = {{"n_snapshots", states.size()}, {"mass_drift", to_json(mass)}};
  }

  int run_kg(const RunConfig& cfg, const fs::path& root, json meta, json& summary) {
    const GridSpec grid = cfg.grid();
    const PhysicalConstants& c = cfg.constants;
    KGState init = std::visit(
        [&](const auto& s) -> KGState {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, KGPacketSpec>) {
            return kg_packet(grid, s.sigma, s.x0, s.k0, c);
          } else if constexpr (std::is_same_v<S, PlaneWave>) {
            return kg_mode(grid, s.k, c);
          } else if constexpr (std::is_same_v<S, StandingWave>) {
            const WaveField w = oracle_state(s, grid, c);
            return {w, WaveField::zeros(grid), 0.0};
          } else {
            throw ConfigError("initial.kind", "solver kg takes kg_packet, plane_wave or standing_wave");
          }
        },
        cfg.initial);
    const auto series = kg_evolve(init, c, cfg.dt, cfg.n_steps, cfg.snapshot_every);
    std::vector<std::pair<double, Columns>> rows;
    std::vector<double> charge;
    const double q0 = kg_charge(series.front(), c);
    for (const auto& st : series) {
      rows.emplace_back(st.time, kg_columns(st, c));
      charge.push_back(kg_charge(st, c));
    }
    meta["solver"] = "kg";
    write_snapshot_set(root / "kg", cfg.format, grid, c, meta, rows);
    double drift = 0.0;
    for (double q : charge) drift = std::max(drift, std::abs(q - q0));
    json kg = {{"n_snapshots", series.size()}, {"charge", to_json(charge)}, {"max_charge_drift", drift}};
    try {
      if (series.size() >= 2) kg["covariant_continuity_residual"] = to_json(covariant_continuity_residual(series, c));
      kg["relativistic_hjb_residual"] = to_json(relativistic_hjb_residual(series, c).residual);
    } catch (const NodeError& e) {
      kg["notes"] = {{"residuals", e.what()}};
    }
    summary["kg"] = kg;
    return kOk;
  }

  void audit_kg(const SnapshotSet& set, json& report) {
    std::vector<KGState> series;
    for (std::size_t n = 0; n < set.times.size(); ++n) series.push_back(set.kg_state(n));
    const PhysicalConstants& c = set.constants;
    std::vector<double> charge;
    for (const auto& st : series) charge.push_back(kg_charge(st, c));
    report["kg_charge"] = to_json(charge);
    if (series.size() >= 2) {
      report["covariant_continuity_residual"] = to_json(covariant_continuity_residual(series, c));
    }
    const auto hjb = relativistic_hjb_residual(series, c);
    report["relativistic_hjb_residual"] = to_json(hjb.residual);
    std::vector<double> flagged(hjb.flagged.begin(), hjb.flagged.end());
    report["effective_mass_flagged_points"] = to_json(flagged);
  }

  Options opt_;
  std::ostream& out_;
};

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Real-valued quantum hydrodynamics laboratory"};
  app.require_subcommand(1);
  Options opt;
  std::string audit_dir;

  auto* ev = app.add_subcommand("evolve", "Evolve an initial state and write snapshots");
  auto* kg = app.add_subcommand("kg", "Evolve with the Klein-Gordon solver");
  for (auto* sub : {ev, kg}) {
    sub->add_option("--config", opt.config, "Run configuration (JSON)")->required();
    sub->add_option("--out", opt.out, "Output directory (overrides output.directory)");
    sub->add_flag("--quiet", opt.quiet, "Suppress progress output");
  }
  auto* au = app.add_subcommand("audit", "Residuals and uncertainty block of a snapshot set");
  auto* un = app.add_subcommand("uncertainty", "Uncertainty block of a snapshot set");
  for (auto* sub : {au, un}) {
    sub->add_option("snapshot_dir", audit_dir, "Snapshot directory")->required();
    sub->add_option("--out", opt.out, "Write the report here instead of stdout");
    sub->add_flag("--quiet", opt.quiet, "Suppress progress output");
  }
  auto* tr = app.add_subcommand("trajectories", "Bohmian trajectories through a snapshot set");
  tr->add_option("--config", opt.config, "Run configuration (JSON)")->required();
  tr->add_option("--snapshots", opt.snapshots, "Snapshot directory (default <output>/spectral)");
  tr->add_option("--out", opt.out, "Output directory (default <output>/trajectories)");
  tr->add_flag("--quiet", opt.quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfig;
  }

  try {
    Runner run(opt, out);
    if (ev->parsed()) return run.evolve();
    if (kg->parsed()) return run.evolve(std::string("kg"));
    if (au->parsed()) return run.audit(audit_dir, false);
    if (un->parsed()) return run.audit(audit_dir, true);
    return run.trajectories();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace qhydro::cli
