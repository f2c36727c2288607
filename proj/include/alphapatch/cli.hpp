#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "alphapatch/bounds.hpp"
#include "alphapatch/dynamics.hpp"
#include "alphapatch/io.hpp"
#include "alphapatch/kernel.hpp"

namespace alphapatch {

// Exit codes shared by all subcommands.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

inline std::string snapshot_name(std::size_t step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "snapshots/snap_%08zu.csv", step);
  return buf;
}

}  // namespace detail

struct SimulateResult {
  int exit_code = kExitOk;
  std::optional<Trajectory> trajectory;  // set on success
};

/// Runs evolve and writes diagnostics.csv, snapshots/*.csv and manifest.json
/// into out_dir. Diagnostics and snapshots are streamed as they are produced so
/// a failed run keeps its partial output; the manifest is written last.
inline SimulateResult simulate_to_dir(const SimConfig& cfg, const fs::path& out_dir,
                                      std::ostream& log = std::cerr) {
  fs::create_directories(out_dir / "snapshots");
  const std::string start = detail::utc_now();
  const auto wall0 = std::chrono::steady_clock::now();

  std::ofstream diag(out_dir / "diagnostics.csv", std::ios::binary | std::ios::trunc);
  if (!diag) throw IoError("cannot write " + (out_dir / "diagnostics.csv").string());
  diag << diagnostics_csv_header(cfg.n_max);

  json snapshots = json::array();
  std::size_t records = 0;
  auto observer = [&](const Snapshot& s) {
    diag << diagnostics_csv_row(s.diagnostics);
    diag.flush();
    if (s.field) {
      const std::string name = detail::snapshot_name(s.step);
      write_text_atomic(out_dir / name, snapshot_csv(*s.field, s.t));
      snapshots.push_back({{"record", records}, {"step", s.step}, {"t", s.t}, {"path", name}});
    }
    ++records;
  };

  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(cfg);
  manifest["start_time"] = start;

  SimulateResult result;
  json failure = nullptr;
  double R0 = 0.0, dt = cfg.dt;
  try {
    Trajectory traj = evolve(cfg, observer);
    R0 = traj.R0;
    dt = traj.dt;
    result.trajectory = std::move(traj);
  } catch (const SimulationError& e) {
    failure = {{"kind", e.kind()}, {"message", e.what()}, {"time", e.time()}, {"step", e.step()}};
    result.exit_code = kExitNumerical;
    log << "simulate: " << e.kind() << " at t = " << e.time() << ": " << e.what() << "\n";
  } catch (const DomainError& e) {
    failure = {{"kind", "domain"}, {"message", e.what()}, {"time", nullptr}, {"step", nullptr}};
    result.exit_code = kExitNumerical;
    log << "simulate: " << e.what() << "\n";
  }
  diag.close();

  if (!result.trajectory) {
    // Recover R0 from the initial field so the manifest stays loadable.
    try {
      R0 = support_radius(make_initial_field(cfg));
    } catch (const std::exception&) {
    }
  }
  const auto wall1 = std::chrono::steady_clock::now();
  manifest["end_time"] = detail::utc_now();
  manifest["wall_seconds"] = std::chrono::duration<double>(wall1 - wall0).count();
  manifest["threads"] = thread_count();
  manifest["R0"] = R0;
  manifest["dt"] = dt;
  manifest["records"] = records;
  manifest["files"] = {{"diagnostics", "diagnostics.csv"}, {"snapshots", snapshots}};
  manifest["status"] = result.exit_code == kExitOk ? "ok" : "failed";
  manifest["failure"] = failure;
  write_text_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

inline int cmd_simulate(const SimConfig& cfg, const fs::path& out_dir, std::ostream& log = std::cerr) {
  return simulate_to_dir(cfg, out_dir, log).exit_code;
}

inline const std::vector<std::string>& all_checks() {
  static const std::vector<std::string> names = {"confinement", "moments", "tail", "decay"};
  return names;
}

struct CheckOptions {
  std::vector<std::string> checks = all_checks();
  double tail_k = 4.0;
  fs::path report_dir;  // default: <trajectory_dir>/reports
};

inline std::vector<BoundReport> run_checks(const Trajectory& traj, const SimConfig& cfg,
                                           const CheckOptions& opt) {
  std::vector<BoundReport> reports;
  const double alpha = cfg.alpha;
  for (const std::string& name : opt.checks) {
    if (name == "confinement") {
      reports.push_back(check_confinement(traj, alpha));
    } else if (name == "moments") {
      reports.push_back(check_moment_hierarchy(traj, alpha, cfg.n_max));
    } else if (name == "tail") {
      reports.push_back(check_tail_mass(traj, alpha, opt.tail_k));
    } else if (name == "decay") {
      const Snapshot* last = nullptr;
      for (const Snapshot& s : traj.snapshots)
        if (s.field) last = &s;
      if (!last) throw IoError("decay check needs at least one stored field");
      reports.push_back(check_radial_decay(*last->field, KernelParams(alpha)));
    } else {
      throw ConfigError("checks", "unknown check '" + name + "'");
    }
  }
  return reports;
}

/// Loads a trajectory directory, runs the selected checks and writes one
/// <check_name>.json per report. Exit 0 iff every verdict passes.
inline int cmd_check(const fs::path& dir, const CheckOptions& opt, std::ostream& out = std::cout,
                     std::ostream& log = std::cerr) {
  Trajectory traj;
  SimConfig cfg;
  try {
    traj = load_trajectory(dir, &cfg);
  } catch (const std::exception& e) {
    log << "check: cannot load trajectory: " << e.what() << "\n";
    return kExitUsage;
  }
  std::vector<BoundReport> reports;
  try {
    reports = run_checks(traj, cfg, opt);
  } catch (const ConfigError& e) {
    log << "check: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    log << "check: " << e.what() << "\n";
    return kExitNumerical;
  }
  const fs::path report_dir = opt.report_dir.empty() ? dir / "reports" : opt.report_dir;
  fs::create_directories(report_dir);
  bool all_pass = true;
  for (const BoundReport& r : reports) {
    write_text_atomic(report_dir / (r.check_name + ".json"), report_to_json(r).dump(2) + "\n");
    out << r.check_name << ": " << (r.pass ? "pass" : "FAIL") << " (margin " << r.margin << ")\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? kExitOk : kExitNumerical;
}

struct SweepConfig {
  SimConfig base;
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> checks = {"confinement"};
};

inline SweepConfig sweep_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "sweep config must be a JSON object");
  detail::reject_unknown(j, {"base", "alphas", "seeds", "checks"}, "");
  for (const char* key : {"base", "alphas", "seeds"})
    if (!j.contains(key)) throw ConfigError(key, "missing required key");
  SweepConfig s;
  s.base = config_from_json(j.at("base"));
  s.alphas = detail::get_field<std::vector<double>>(j, "alphas", "");
  s.seeds = detail::get_field<std::vector<std::uint64_t>>(j, "seeds", "");
  if (j.contains("checks")) s.checks = detail::get_field<std::vector<std::string>>(j, "checks", "");
  if (s.alphas.empty() || s.seeds.empty()) throw ConfigError("alphas", "alphas and seeds must be non-empty");
  for (double a : s.alphas) {
    SimConfig c = s.base;
    c.alpha = a;
    validate(c);
  }
  for (const auto& name : s.checks)
    if (std::find(all_checks().begin(), all_checks().end(), name) == all_checks().end())
      throw ConfigError("checks", "unknown check '" + name + "'");
  return s;
}

inline SweepConfig parse_sweep_config(const fs::path& path) {
  return sweep_config_from_json(parse_json_text(read_text_file(path), path.string()));
}

inline std::string run_dir_name(double alpha, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "alpha_%g_seed_%llu", alpha, static_cast<unsigned long long>(seed));
  return buf;
}

/// Cartesian alpha x seed sweep: one run directory each (simulate + checks),
/// then aggregate.csv with one row per run. Failed runs are recorded and the
/// sweep continues. Exit 0 iff every run simulated and passed its checks.
inline int cmd_sweep(const SweepConfig& sweep, const fs::path& out_dir, std::ostream& out = std::cout,
                     std::ostream& log = std::cerr) {
  fs::create_directories(out_dir);
  std::string aggregate = "# alphapatch sweep v1\nalpha,seed,C0_hat,C0_hat_half,p_hat,status\n";
  bool all_ok = true;
  for (double alpha : sweep.alphas)
    for (std::uint64_t seed : sweep.seeds) {
      SimConfig cfg = sweep.base;
      cfg.alpha = alpha;
      cfg.seed = seed;
      const fs::path run = out_dir / run_dir_name(alpha, seed);
      double c0 = std::numeric_limits<double>::quiet_NaN(), c0_half = c0, p_hat = c0;
      std::string status = "ok";
      try {
        const SimulateResult sim = simulate_to_dir(cfg, run, log);
        if (sim.exit_code != kExitOk) {
          status = "simulate-failed";
        } else {
          CheckOptions opt;
          opt.checks = sweep.checks;
          std::ostringstream sink;
          const int rc = cmd_check(run, opt, sink, log);
          if (rc != kExitOk) status = "check-failed";
          const fs::path conf = run / "reports" / "confinement.json";
          if (fs::exists(conf)) {
            const BoundReport r = report_from_json(json::parse(read_text_file(conf)));
            c0 = r.constants.at("C0_hat");
            c0_half = r.constants.at("C0_hat_half");
            p_hat = r.constants.at("p_hat");
          }
        }
      } catch (const std::exception& e) {
        status = "error";
        log << "sweep: run " << run.string() << ": " << e.what() << "\n";
      }
      all_ok = all_ok && status == "ok";
      aggregate += detail::fmt(alpha) + "," + std::to_string(seed) + "," + detail::fmt(c0) + "," +
                   detail::fmt(c0_half) + "," + detail::fmt(p_hat) + "," + status + "\n";
      out << run_dir_name(alpha, seed) << ": " << status << "\n";
    }
  write_text_atomic(out_dir / "aggregate.csv", aggregate);
  return all_ok ? kExitOk : kExitNumerical;
}

/// CSV of alpha, riesz_constant, kernel_prefactor over the grid.
inline int cmd_kernel_table(const std::vector<double>& alphas, std::ostream& out,
                            std::ostream& log = std::cerr) {
  std::string s = "# alphapatch kernel-table v1\nalpha,riesz_constant,kernel_prefactor\n";
  for (double a : alphas) {
    try {
      const KernelParams p(a);
      s += detail::fmt(a) + "," + detail::fmt(p.riesz_constant()) + "," +
           detail::fmt(p.kernel_prefactor()) + "\n";
    } catch (const DomainError& e) {
      log << "kernel-table: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  out << s;
  return kExitOk;
}

struct LemmaOptions {
  std::size_t fields = 50;
  std::uint64_t seed = 0;
  std::size_t grid = 32;
  std::size_t points = 100;
  double tolerance = 1e-2;
  std::vector<double> betas = {0.5, 1.0, 1.5};
  std::vector<double> ps = {std::numeric_limits<double>::infinity(), 4.0};
};

struct LemmaSummary {
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::size_t skipped_pairs = 0;
  double worst_margin = 0.0;
  json detail = json::array();
};

/// Runs the interpolation-lemma check on seeded random grid fields for every
/// (beta, p) pair. Pairs with p <= 2/(2 - beta) lie outside the lemma and are
/// reported as skipped.
inline LemmaSummary run_lemma_checks(const LemmaOptions& opt) {
  LemmaSummary sum;
  for (double beta : opt.betas)
    for (double p : opt.ps) {
      json pair = {{"beta", beta}, {"p", std::isinf(p) ? json("inf") : json(p)}};
      if (!std::isinf(p) && !(p > 2.0 / (2.0 - beta))) {
        pair["status"] = "skipped: p <= 2/(2-beta), explicit constant diverges";
        ++sum.skipped_pairs;
        sum.detail.push_back(pair);
        continue;
      }
      std::size_t fails = 0;
      double worst = 0.0;
      for (std::size_t f = 0; f < opt.fields; ++f) {
        const GridField h = make_random_grid_field(opt.seed + f, opt.grid);
        const BoundReport r =
            interpolation_lemma_check(h, beta, p, opt.points, opt.seed * 7919 + f, opt.tolerance);
        ++sum.checked;
        worst = std::max(worst, r.margin);
        if (!r.pass) ++fails;
      }
      sum.failures += fails;
      sum.worst_margin = std::max(sum.worst_margin, worst);
      pair["status"] = fails == 0 ? "pass" : "fail";
      pair["failures"] = fails;
      pair["worst_margin"] = worst;
      sum.detail.push_back(pair);
    }
  return sum;
}

inline int cmd_lemma_check(const LemmaOptions& opt, const fs::path& out_dir, std::ostream& out = std::cout) {
  const LemmaSummary sum = run_lemma_checks(opt);
  const json report = {{"check_name", "interpolation_lemma"},
                       {"fields", opt.fields},
                       {"seed", opt.seed},
                       {"checked", sum.checked},
                       {"failures", sum.failures},
                       {"skipped_pairs", sum.skipped_pairs},
                       {"worst_margin", sum.worst_margin},
                       {"verdict", sum.failures == 0 ? "pass" : "fail"},
                       {"pairs", sum.detail}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text_atomic(out_dir / "interpolation_lemma.json", report.dump(2) + "\n");
  }
  out << "interpolation_lemma: " << sum.checked << " checks, " << sum.failures << " failures, worst margin "
      << sum.worst_margin << "\n";
  return sum.failures == 0 ? kExitOk : kExitNumerical;
}

}  // namespace alphapatch
