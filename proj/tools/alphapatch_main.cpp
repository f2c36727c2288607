// Command-line front end: simulate, check, sweep, kernel-table, lemma-check.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alphapatch/alphapatch.hpp"

namespace ap = alphapatch;

namespace {

std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 20; ++k) g.push_back(0.05 * k);
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alphapatch: alpha-patch active scalar simulator and estimate checker"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: $ALPHAPATCH_THREADS, else all cores)")
      ->check(CLI::NonNegativeNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one simulation and write diagnostics, snapshots, manifest");
  std::string sim_config, sim_out = "run";
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--config", sim_config,
                  "JSON config. Required keys: alpha, t_end, initial_condition{type,...}. Defaults: "
                  "dt=0.05, integrator=rk4, representation=particles, output_stride=10, seed=0, "
                  "n_particles=4096, n_nodes=512, eps=0.5*mean spacing, n_max=6, snapshot_every=1; "
                  "initial_condition R0=1, theta0=1, inner_radius=0.5, n_blobs=4, aspect=2")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Override the config seed");

  // check
  auto* chk = app.add_subcommand("check", "Run estimate checks on a trajectory directory");
  std::string chk_dir, chk_out;
  std::vector<std::string> chk_checks = ap::all_checks();
  double tail_k = 4.0;
  chk->add_option("dir", chk_dir, "Trajectory directory written by simulate")->required();
  chk->add_option("--checks", chk_checks, "Subset of: confinement moments tail decay")
      ->delimiter(',')
      ->check(CLI::IsMember(ap::all_checks()))
      ->capture_default_str();
  chk->add_option("--tail-k", tail_k, "Decay exponent k for the tail-mass check")->capture_default_str();
  chk->add_option("--out", chk_out, "Report directory (default: <dir>/reports)");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Cartesian alpha x seed sweep with aggregate CSV");
  std::string swp_config, swp_out = "sweep";
  swp->add_option("--config", swp_config, "Sweep JSON: {base: <config>, alphas: [...], seeds: [...], checks: [...]}")
      ->required()
      ->check(CLI::ExistingFile);
  swp->add_option("--out", swp_out, "Output directory")->capture_default_str();

  // kernel-table
  auto* kt = app.add_subcommand("kernel-table", "CSV of riesz_constant and kernel_prefactor over an alpha grid");
  std::vector<double> kt_alphas = default_alpha_grid();
  std::string kt_out;
  kt->add_option("--alphas", kt_alphas, "Comma-separated alpha values in (0,1]")->delimiter(',');
  kt->add_option("--out", kt_out, "Output CSV file (default: stdout)");

  // lemma-check
  auto* lc = app.add_subcommand("lemma-check", "Interpolation lemma on seeded random grid fields");
  ap::LemmaOptions lemma;
  std::string lc_out;
  std::optional<std::uint64_t> lc_seed;
  lc->add_option("--fields", lemma.fields, "Number of random fields")->capture_default_str();
  lc->add_option("--grid", lemma.grid, "Grid cells per side")->capture_default_str();
  lc->add_option("--points", lemma.points, "Random evaluation points per field")->capture_default_str();
  lc->add_option("--seed", lc_seed, "Base seed");
  lc->add_option("--out", lc_out, "Directory for interpolation_lemma.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ap::kExitUsage;
  }
  if (threads > 0) ap::set_thread_count(threads);

  try {
    if (*sim) {
      ap::SimConfig cfg = ap::parse_config(sim_config);
      if (sim_seed) cfg.seed = *sim_seed;
      return ap::cmd_simulate(cfg, sim_out);
    }
    if (*chk) {
      ap::CheckOptions opt;
      opt.checks = chk_checks;
      opt.tail_k = tail_k;
      opt.report_dir = chk_out;
      return ap::cmd_check(chk_dir, opt);
    }
    if (*swp) return ap::cmd_sweep(ap::parse_sweep_config(swp_config), swp_out);
    if (*kt) {
      if (kt_out.empty()) return ap::cmd_kernel_table(kt_alphas, std::cout);
      std::ofstream out(kt_out);
      if (!out) {
        std::cerr << "kernel-table: cannot write " << kt_out << "\n";
        return ap::kExitUsage;
      }
      return ap::cmd_kernel_table(kt_alphas, out);
    }
    if (*lc) {
      if (lc_seed) lemma.seed = *lc_seed;
      return ap::cmd_lemma_check(lemma, lc_out);
    }
  } catch (const ap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ap::kExitUsage;
  } catch (const ap::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return ap::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ap::kExitNumerical;
  }
  return ap::kExitUsage;
}
