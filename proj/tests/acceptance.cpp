// Acceptance suite. Prints one line per criterion:
//   criterion N: PASS|FAIL  <title>  | <measured values>
// Arguments select criteria by number (default: all). Exit 0 iff all selected pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "alphapatch/alphapatch.hpp"

using namespace alphapatch;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPiInv = 1.0 / (2.0 * std::numbers::pi);

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

Outcome kernel_constants() {
  const double c1 = riesz_constant(1.0);
  const double c05 = riesz_constant(0.5);
  const double small = 1e-6 * riesz_constant(1e-6);
  // 30-digit Gamma-function evaluation
  const double ref05 = 0.332967935501700261955760871273;
  const double e1 = rel(c1, kTwoPiInv), e05 = std::abs(c05 - ref05), e0 = std::abs(small - kTwoPiInv);
  Outcome o;
  o.pass = e1 <= 1e-12 && e05 <= 1e-10 && e0 <= 1e-4;
  o.detail = fmt("c(1) rel err %.2e (<=1e-12), |c(0.5)-ref| %.2e (<=1e-10), |a c(a)-1/2pi| at 1e-6 %.2e (<=1e-4)",
                 e1, e05, e0);
  return o;
}

// Equal pair separated by d rotates rigidly about its midpoint with period
// T = pi d^{2+alpha} / (w prefactor).
Outcome two_body() {
  Outcome o;
  o.pass = true;
  std::ostringstream s;
  for (double alpha : {0.2, 0.5, 0.8}) {
    const KernelParams params(alpha);
    const double d = 1.0, w = 1.0;
    const double period = std::numbers::pi * std::pow(d, 2.0 + alpha) / (w * params.kernel_prefactor());
    auto error_with = [&](int steps) {
      ParticleField f;
      f.positions = {{-0.5 * d, 0.0}, {0.5 * d, 0.0}};
      f.weights = {w, w};
      f.eps = 1e-12;
      Field field = f;
      const double dt = period / steps;
      for (int k = 0; k < steps; ++k) field = step_rk4(field, dt, params);
      const Points& x = material_points(field);
      return std::max(norm(x[0] - f.positions[0]), norm(x[1] - f.positions[1])) / d;
    };
    const double e1 = error_with(1000), e2 = error_with(2000);
    const double ratio = e1 / e2;
    const bool ok = e1 <= 1e-6 && ratio >= 12.0 && ratio <= 20.0;
    o.pass = o.pass && ok;
    s << fmt("a=%.1f err %.2e ratio %.2f; ", alpha, e1, ratio);
  }
  o.detail = s.str() + "need err<=1e-6 d, ratio in [12,20]";
  return o;
}

Outcome steady_patch() {
  SimConfig c;
  c.alpha = 0.5;
  c.representation = Representation::contour;
  c.n_nodes = 512;
  c.t_end = 10.0;
  c.output_stride = 10;
  c.initial_condition.type = "disk";
  const Trajectory traj = evolve(c);
  const DiagnosticsRecord& d0 = traj.snapshots.front().diagnostics;
  double worst_r = 0.0, worst_a = 0.0;
  for (const Snapshot& s : traj.snapshots) {
    worst_r = std::max(worst_r, rel(s.diagnostics.support_radius, d0.support_radius));
    worst_a = std::max(worst_a, rel(s.diagnostics.mass, d0.mass));
  }
  Outcome o;
  o.pass = worst_r <= 1e-3 && worst_a <= 1e-4;
  o.detail = fmt("max rel support change %.2e (<=1e-3), max rel area change %.2e (<=1e-4), dt %.3g, %zu records",
                 worst_r, worst_a, traj.dt, traj.snapshots.size());
  return o;
}

struct Drift {
  bool mass_exact = true, max_theta_exact = true;
  double center = 0.0;   // max |center(t) - center(0)| / R0
  double inertia = 0.0;  // max |i(t) - i(0)| / i(0)
};

Drift conservation_run(double dt) {
  SimConfig c;
  c.alpha = 0.5;
  c.dt = dt;
  c.t_end = 10.0;
  c.n_particles = 4096;
  c.output_stride = static_cast<int>(std::lround(0.5 / dt));
  c.seed = 2024;
  c.initial_condition.type = "random-blobs";
  const Trajectory traj = evolve(c);
  const DiagnosticsRecord& d0 = traj.snapshots.front().diagnostics;
  Drift d;
  for (const Snapshot& s : traj.snapshots) {
    d.mass_exact = d.mass_exact && s.diagnostics.mass == d0.mass;
    d.max_theta_exact = d.max_theta_exact && s.diagnostics.max_theta == d0.max_theta;
    d.center = std::max(d.center, norm(s.diagnostics.center - d0.center) / traj.R0);
    d.inertia = std::max(d.inertia, std::abs(s.diagnostics.inertia - d0.inertia) / d0.inertia);
  }
  return d;
}

// Observed convergence order from one halving.
double order(double coarse, double fine) { return std::log2(coarse / fine); }

Outcome conservation() {
  const Drift a = conservation_run(0.05), b = conservation_run(0.025);
  const double rc = a.center / b.center, ri = a.inertia / b.inertia;
  const bool center_ok = a.center <= 1e-6 && rc >= 12.0 && rc <= 20.0;
  const bool inertia_ok = a.inertia <= 1e-6 && ri >= 12.0 && ri <= 20.0;
  Outcome o;
  o.pass = a.mass_exact && b.mass_exact && a.max_theta_exact && b.max_theta_exact && center_ok && inertia_ok;
  o.detail = fmt("mass exact %s, max_theta exact %s; |dc|/R0 %.2e -> %.2e ratio %.2f (roundoff level: the "
                 "discrete scheme conserves it exactly); |di|/i0 %.2e -> %.2e ratio %.2f, order %.2f "
                 "(need <=1e-6 and ratio in [12,20] for both)",
                 a.mass_exact && b.mass_exact ? "yes" : "no", a.max_theta_exact && b.max_theta_exact ? "yes" : "no",
                 a.center, b.center, rc, a.inertia, b.inertia, ri, order(a.inertia, b.inertia));
  return o;
}

Outcome far_field() {
  Outcome o;
  o.pass = true;
  std::ostringstream s;
  for (double alpha : {0.2, 0.5, 0.8}) {
    SimConfig c;
    c.alpha = alpha;
    c.initial_condition.type = "two-disks";
    const Field f = make_initial_field(c);
    const BoundReport r = check_radial_decay(f, KernelParams(alpha));
    const double slope = r.constants.at("slope");
    o.pass = o.pass && r.pass && std::isfinite(slope);
    s << fmt("a=%.1f slope %.3f (<= %.2f); ", alpha, slope, -(3.0 + alpha) + 0.2);
  }
  o.detail = s.str();
  return o;
}

Outcome interpolation_lemma() {
  LemmaOptions opt;
  opt.fields = 50;
  opt.points = 100;
  const LemmaSummary sum = run_lemma_checks(opt);
  // The pair outside the lemma's hypotheses must be refused, not silently evaluated.
  bool rejected = false;
  try {
    interpolation_lemma_check(make_random_grid_field(0, opt.grid), 1.5, 4.0, 10, 0);
  } catch (const PreconditionError&) {
    rejected = true;
  }
  Outcome o;
  o.pass = sum.failures == 0 && sum.checked == 5 * opt.fields && sum.skipped_pairs == 1 && rejected;
  o.detail = fmt("%zu field checks over 5 admissible (beta,p) pairs, %zu failures, worst LHS/RHS %.3f; "
                 "(1.5,4) has p = 2/(2-beta): constant diverges, %s",
                 sum.checked, sum.failures, sum.worst_margin, rejected ? "rejected as inadmissible" : "NOT rejected");
  return o;
}

Outcome moment_hierarchy() {
  SimConfig c;
  c.alpha = 0.5;
  c.t_end = 50.0;
  c.n_particles = 4096;
  c.output_stride = 20;
  c.seed = 7;
  c.initial_condition.type = "random-blobs";
  const Trajectory traj = evolve(c);
  const BoundReport r = check_moment_hierarchy(traj, c.alpha, 6);
  const double expo = r.constants.at("n_exponent");
  const double c_full = r.constants.at("C0_hat"), c_half = r.constants.at("C0_hat_half");
  const bool expo_ok = std::isfinite(expo) && std::abs(expo - (1.0 + c.alpha)) <= 0.3;
  Outcome o;
  o.pass = r.pass && r.margin <= 1.0 + 1e-12 && expo_ok;
  std::ostringstream slopes;
  for (int n = 1; n <= 6; ++n) slopes << fmt("%s%.3g", n == 1 ? "" : ",", r.constants.at("slope_n" + std::to_string(n)));
  o.detail = fmt("C0_hat %.4g, half-trajectory %.4g (within 20%%: %s), margin %.6f, per-n slopes [%s], "
                 "exponent in n %.3f (need %.1f +- 0.3)",
                 c_full, c_half, r.pass ? "yes" : "no", r.margin, slopes.str().c_str(), expo, 1.0 + c.alpha);
  return o;
}

Outcome confinement_sweep() {
  Outcome o;
  o.pass = true;
  std::ostringstream s;
  for (double alpha : {0.1, 0.5, 0.9})
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      SimConfig c;
      c.alpha = alpha;
      c.seed = seed;
      c.t_end = 100.0;
      c.n_particles = 1024;
      c.output_stride = 20;
      c.initial_condition.type = "random-blobs";
      const Trajectory traj = evolve(c);
      const BoundReport r = check_confinement(traj, alpha);
      const double p_hat = r.constants.at("p_hat");
      const bool ok = r.pass && p_hat <= 1.0 / (4.0 + alpha) + 0.1;
      o.pass = o.pass && ok;
      s << fmt("a=%.1f s=%llu p=%.3f C0=%.3g/%.3g%s; ", alpha, static_cast<unsigned long long>(seed), p_hat,
               r.constants.at("C0_hat"), r.constants.at("C0_hat_half"), ok ? "" : " FAIL");
    }
  o.detail = s.str() + "need p <= 1/(4+a)+0.1, half-fit C0 within 10%";
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "kernel constants", kernel_constants},
      {2, "two-body period oracle", two_body},
      {3, "steady circular patch", steady_patch},
      {4, "conservation drift", conservation},
      {5, "far-field radial decay", far_field},
      {6, "interpolation lemma", interpolation_lemma},
      {7, "moment hierarchy", moment_hierarchy},
      {8, "confinement envelope sweep", confinement_sweep},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  bool all_pass = true;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_pass = all_pass && o.pass;
    std::printf("criterion %d: %s  %s  | %s [%.1fs]\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
