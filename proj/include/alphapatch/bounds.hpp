#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "alphapatch/diagnostics.hpp"
#include "alphapatch/dynamics.hpp"
#include "alphapatch/errors.hpp"
#include "alphapatch/quadrature.hpp"

namespace alphapatch {

// Outcome of one quantitative check. margin is the worst LHS/RHS ratio over
// the samples (or the normalized exponent excess for slope checks); pass iff
// margin <= 1 for the envelope checks.
struct BoundReport {
  std::string check_name;
  std::map<std::string, double> constants;
  bool pass = false;
  double margin = 0.0;
  std::size_t samples = 0;
  std::vector<std::string> notes;
};

// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

// |a - b| <= tol * max(|a|, |b|); two zeros agree.
inline bool agree_within(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 || std::abs(a - b) <= tol * scale;
}

inline std::vector<Snapshot> first_half(const Trajectory& traj) {
  const double t_mid = 0.5 * traj.snapshots.back().t;
  std::vector<Snapshot> out;
  for (const Snapshot& s : traj.snapshots)
    if (s.t <= t_mid) out.push_back(s);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Confinement of the support

/// 4 R0 + C0 (t ln(2 + t))^{1/(4+alpha)}
inline double confinement_envelope(double t, double R0, double C0, double alpha) {
  if (!(t >= 0.0) || !(R0 > 0.0) || !(C0 >= 0.0))
    throw PreconditionError("confinement_envelope: need t >= 0, R0 > 0, C0 >= 0");
  return 4.0 * R0 + C0 * std::pow(t * std::log(2.0 + t), 1.0 / (4.0 + alpha));
}

// Smallest C0 >= 0 with r_supp(t) <= envelope(t) on every snapshot with t > 0.
inline double fit_confinement_constant(std::span<const Snapshot> snaps, double R0, double alpha) {
  double c = 0.0;
  for (const Snapshot& s : snaps) {
    if (s.t <= 0.0) continue;
    const double g = std::pow(s.t * std::log(2.0 + s.t), 1.0 / (4.0 + alpha));
    c = std::max(c, (s.diagnostics.support_radius - 4.0 * R0) / g);
  }
  return c;
}

/// Fits C0 for the confinement envelope and checks that the fit is stable:
/// the first half of the trajectory must give the same C0 within 10%.
/// Also reports the growth exponent p_hat, the least-squares slope of
/// log(max(r_supp(t) - r_supp(0), 0) + delta) against log t, delta = 1e-3 R0.
inline BoundReport check_confinement(const Trajectory& traj, double alpha) {
  if (traj.snapshots.size() < 10)
    throw PreconditionError("check_confinement: need at least 10 snapshots");
  if (!(traj.snapshots.back().t > 0.0))
    throw PreconditionError("check_confinement: trajectory must reach t > 0");
  const double R0 = traj.R0;
  const double delta = 1e-3 * R0;
  BoundReport rep;
  rep.check_name = "confinement";

  const double c_full = fit_confinement_constant(traj.snapshots, R0, alpha);
  const std::vector<Snapshot> half = detail::first_half(traj);
  const double c_half = fit_confinement_constant(half, R0, alpha);

  const double r_init = traj.snapshots.front().diagnostics.support_radius;
  std::vector<double> lx, ly;
  double margin = 0.0;
  bool grows = false;
  for (const Snapshot& s : traj.snapshots) {
    const double r = s.diagnostics.support_radius;
    margin = std::max(margin, r / confinement_envelope(s.t, R0, c_full, alpha));
    if (s.t <= 0.0) continue;
    grows = grows || r > r_init;
    lx.push_back(std::log(s.t));
    ly.push_back(std::log(std::max(r - r_init, 0.0) + delta));
  }
  const double p_hat = fit_slope(lx, ly);

  rep.constants["C0_hat"] = c_full;
  rep.constants["C0_hat_half"] = c_half;
  rep.constants["R0"] = R0;
  rep.constants["p_hat"] = p_hat;
  rep.constants["p_envelope"] = 1.0 / (4.0 + alpha);
  rep.constants["delta"] = delta;
  rep.margin = margin;
  rep.samples = traj.snapshots.size();
  rep.pass = std::isfinite(c_full) && detail::agree_within(c_full, c_half, 0.10);
  if (!grows) rep.notes.push_back("support radius never exceeds its initial value");
  if (c_full == 0.0) rep.notes.push_back("support stays inside 4 R0: C0_hat = 0");
  rep.notes.push_back("particle support radius is max|x_i| + eps");
  return rep;
}

// ---------------------------------------------------------------------------
// Moment hierarchy

/// m0 (R0^{4+alpha} + C0 i0 n^{1+alpha} t)^n, evaluated in the log domain.
inline double moment_bound_rhs(int n, double t, double m0, double R0, double i0, double C0,
                               double alpha) {
  if (n < 1 || !(t >= 0.0) || !(m0 > 0.0) || !(R0 > 0.0) || !(i0 >= 0.0) || !(C0 >= 0.0))
    throw PreconditionError("moment_bound_rhs: invalid arguments");
  const double base = std::pow(R0, 4.0 + alpha) + C0 * i0 * std::pow(n, 1.0 + alpha) * t;
  const double log_value = std::log(m0) + n * std::log(base);
  if (log_value > std::log(std::numeric_limits<double>::max()))
    throw RangeError("moment_bound_rhs: result exceeds the double range");
  return std::exp(log_value);
}

inline double fit_moment_constant(std::span<const Snapshot> snaps, int n_max, double m0, double R0,
                                  double i0, double alpha) {
  const double base = std::pow(R0, 4.0 + alpha);
  double c = 0.0;
  for (const Snapshot& s : snaps) {
    if (s.t <= 0.0) continue;
    for (int n = 1; n <= n_max; ++n) {
      const double root = std::pow(s.diagnostics.moments[n - 1] / m0, 1.0 / n);
      c = std::max(c, (root - base) / (i0 * std::pow(n, 1.0 + alpha) * s.t));
    }
  }
  return c;
}

/// Fits the single smallest C0 for which every recorded m_{n,alpha}(t), n <= n_max,
/// lies under the hierarchy bound; passes iff the first-half fit agrees within 20%.
///
/// Also regresses, per n, the least-squares slope of (m_n(t)/m0)^{1/n} in t and
/// reports the log-log exponent of those slopes against n ("n_exponent").
inline BoundReport check_moment_hierarchy(const Trajectory& traj, double alpha, int n_max) {
  if (traj.snapshots.empty()) throw PreconditionError("check_moment_hierarchy: empty trajectory");
  for (const Snapshot& s : traj.snapshots)
    if (static_cast<int>(s.diagnostics.moments.size()) < n_max)
      throw PreconditionError("check_moment_hierarchy: snapshot at t = " + std::to_string(s.t) +
                              " lacks moments up to n = " + std::to_string(n_max));
  const DiagnosticsRecord& d0 = traj.snapshots.front().diagnostics;
  const double m0 = d0.mass, i0 = d0.inertia, R0 = traj.R0;

  BoundReport rep;
  rep.check_name = "moment_hierarchy";
  const double c_full = fit_moment_constant(traj.snapshots, n_max, m0, R0, i0, alpha);
  const std::vector<Snapshot> half = detail::first_half(traj);
  const double c_half = fit_moment_constant(half, n_max, m0, R0, i0, alpha);

  double margin = 0.0;
  for (const Snapshot& s : traj.snapshots)
    for (int n = 1; n <= n_max; ++n)
      margin = std::max(margin, s.diagnostics.moments[n - 1] /
                                    moment_bound_rhs(n, s.t, m0, R0, i0, c_full, alpha));

  std::vector<double> log_n, log_slope;
  std::vector<double> ts;
  for (const Snapshot& s : traj.snapshots) ts.push_back(s.t);
  for (int n = 1; n <= n_max; ++n) {
    std::vector<double> ys;
    for (const Snapshot& s : traj.snapshots)
      ys.push_back(std::pow(s.diagnostics.moments[n - 1] / m0, 1.0 / n));
    const double slope = fit_slope(ts, ys);
    rep.constants["slope_n" + std::to_string(n)] = slope;
    if (slope > 0.0) {
      log_n.push_back(std::log(static_cast<double>(n)));
      log_slope.push_back(std::log(slope));
    }
  }
  const double n_exponent = log_n.size() >= 2 ? fit_slope(log_n, log_slope)
                                              : std::numeric_limits<double>::quiet_NaN();
  if (log_n.size() < 2) rep.notes.push_back("fewer than two positive per-n slopes: no exponent fit");

  rep.constants["C0_hat"] = c_full;
  rep.constants["C0_hat_half"] = c_half;
  rep.constants["m0"] = m0;
  rep.constants["i0"] = i0;
  rep.constants["R0"] = R0;
  rep.constants["n_exponent"] = n_exponent;
  rep.constants["n_exponent_expected"] = 1.0 + alpha;
  rep.margin = margin;
  rep.samples = traj.snapshots.size() * static_cast<std::size_t>(n_max);
  rep.pass = std::isfinite(c_full) && margin <= 1.0 + 1e-12 &&
             detail::agree_within(c_full, c_half, 0.20);
  if (c_full == 0.0) rep.notes.push_back("moments never exceed m0 R0^{(4+alpha)n}: C0_hat = 0");
  return rep;
}

// ---------------------------------------------------------------------------
// Tail mass

struct TailSample {
  double t = 0.0;
  double r = 0.0;     // the tail is measured outside r / 2
  double tail = 0.0;
};

/// Fits tail <= C r^{-k}. C is taken from the samples with t <= t_mid and must
/// cover the remaining samples within 20%; identically zero tails pass vacuously.
inline BoundReport tail_mass_report(std::span<const TailSample> samples, double k, double t_mid) {
  if (!(k > 0.0)) throw PreconditionError("check_tail_mass: k must be > 0");
  BoundReport rep;
  rep.check_name = "tail_mass";
  double c_all = 0.0, c_early = 0.0, max_tail = 0.0;
  for (const TailSample& s : samples) {
    const double c = s.tail * std::pow(s.r, k);
    c_all = std::max(c_all, c);
    if (s.t <= t_mid) c_early = std::max(c_early, c);
    max_tail = std::max(max_tail, s.tail);
  }
  rep.constants["C_hat"] = c_all;
  rep.constants["C_hat_half"] = c_early;
  rep.constants["k"] = k;
  rep.constants["max_tail"] = max_tail;
  rep.samples = samples.size();
  if (c_all == 0.0) {
    rep.pass = true;
    rep.margin = 0.0;
    rep.notes.push_back("tail mass is zero at every sample: check vacuous");
    return rep;
  }
  double margin = 0.0;
  for (const TailSample& s : samples)
    margin = std::max(margin, s.tail / (c_all * std::pow(s.r, -k)));
  rep.margin = margin;
  rep.pass = detail::agree_within(c_all, c_early, 0.20);
  return rep;
}

/// Tail mass outside r/2 for radii r at and beyond the fitted confinement
/// envelope, on every snapshot that carries a field.
inline BoundReport check_tail_mass(const Trajectory& traj, double alpha, double k) {
  if (!(k > 0.0)) throw PreconditionError("check_tail_mass: k must be > 0");
  if (traj.snapshots.empty()) throw PreconditionError("check_tail_mass: empty trajectory");
  const double c0 = fit_confinement_constant(traj.snapshots, traj.R0, alpha);
  constexpr double kFactors[] = {1.0, 1.25, 1.5, 2.0, 3.0, 4.0};
  std::vector<TailSample> samples;
  for (const Snapshot& s : traj.snapshots) {
    if (!s.field) continue;
    const double env = confinement_envelope(s.t, traj.R0, c0, alpha);
    for (double f : kFactors) {
      const double r = f * env;
      samples.push_back({s.t, r, tail_mass(*s.field, 0.5 * r)});
    }
  }
  BoundReport rep = tail_mass_report(samples, k, 0.5 * traj.snapshots.back().t);
  rep.constants["C0_envelope"] = c0;
  return rep;
}

// ---------------------------------------------------------------------------
// Interpolation lemma for int_S h(y) |x - y|^{-beta} dy

// Piecewise-constant nonnegative field on a uniform grid; cell (i, j) covers
// [x0 + i dx, x0 + (i+1) dx] x [y0 + j dy, y0 + (j+1) dy].
struct GridField {
  std::size_t nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, dx = 1.0, dy = 1.0;
  std::vector<double> values;  // row-major, index j * nx + i

  double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
  double cell_area() const { return dx * dy; }
};

inline double grid_l1_norm(const GridField& h) {
  double s = 0.0;
  for (double v : h.values) s += v;
  return s * h.cell_area();
}

inline double grid_lp_norm(const GridField& h, double p) {
  if (std::isinf(p)) return h.values.empty() ? 0.0 : *std::max_element(h.values.begin(), h.values.end());
  double vmax = 0.0;
  for (double v : h.values) vmax = std::max(vmax, v);
  if (vmax == 0.0) return 0.0;
  double s = 0.0;
  for (double v : h.values) s += std::pow(v / vmax, p);
  return vmax * std::pow(s * h.cell_area(), 1.0 / p);
}

/// Constant from splitting the integral at radius k and applying Hoelder on the
/// inner disk: C = 1 + (2 pi / (2 - beta q))^{1/q}, q = p / (p - 1); for p = inf
/// this is 1 + 2 pi / (2 - beta).
inline double interpolation_constant(double beta, double p) {
  if (std::isinf(p)) return 1.0 + 2.0 * std::numbers::pi / (2.0 - beta);
  const double q = p / (p - 1.0);
  return 1.0 + std::pow(2.0 * std::numbers::pi / (2.0 - beta * q), 1.0 / q);
}

/// Integral of |x - y|^{-beta} over the axis-aligned cell [xa, xb] x [ya, yb].
///
/// Near cells are split into the four signed triangles (x, a, b) over the
/// cell edges; in polar coordinates about x each one reduces to
/// d / (2 - beta) * \int_edge |x - y|^{-beta} ds with d the distance from x to
/// the edge line. Far cells use a 3x3 Gauss rule.
inline double cell_power_integral(const Vec2& x, double xa, double xb, double ya, double yb,
                                  double beta) {
  const double w = xb - xa, h = yb - ya;
  const Vec2 c{0.5 * (xa + xb), 0.5 * (ya + yb)};
  if (norm(x - c) > 3.0 * std::max(w, h)) {
    const GaussRule& g = gauss_legendre<3>();
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Vec2 y{c.x1 + 0.5 * w * g.nodes[i], c.x2 + 0.5 * h * g.nodes[j]};
        s += g.weights[i] * g.weights[j] * std::pow(norm2(x - y), -0.5 * beta);
      }
    return s * 0.25 * w * h;
  }
  const Vec2 corners[4] = {{xa, ya}, {xb, ya}, {xb, yb}, {xa, yb}};
  double s = 0.0;
  for (int e = 0; e < 4; ++e) {
    const Vec2& a = corners[e];
    const Vec2& b = corners[(e + 1) % 4];
    const double area2 = cross(a - x, b - x);
    const double len = norm(b - a);
    const double d = std::abs(area2) / len;
    if (d <= 1e-14 * len) continue;  // degenerate triangle
    const double sign = area2 > 0.0 ? 1.0 : -1.0;
    s += sign * d / (2.0 - beta) * segment_power_integral(x, a, b, beta);
  }
  return s;
}

inline double interpolation_lhs(const GridField& h, const Vec2& x, double beta) {
  double s = 0.0;
  for (std::size_t j = 0; j < h.ny; ++j)
    for (std::size_t i = 0; i < h.nx; ++i) {
      const double v = h.at(i, j);
      if (v == 0.0) continue;
      const double xa = h.x0 + i * h.dx, ya = h.y0 + j * h.dy;
      s += v * cell_power_integral(x, xa, xa + h.dx, ya, ya + h.dy, beta);
    }
  return s;
}

inline double interpolation_rhs(const GridField& h, double beta, double p) {
  const double l1 = grid_l1_norm(h);
  const double lp = grid_lp_norm(h, p);
  if (l1 == 0.0 || lp == 0.0) return 0.0;
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double denom = 2.0 - 2.0 * inv_p;
  const double a = (2.0 - beta - 2.0 * inv_p) / denom;
  const double b = beta / denom;
  return interpolation_constant(beta, p) * std::pow(l1, a) * std::pow(lp, b);
}

/// Checks int h(y)|x-y|^{-beta} dy <= C ||h||_1^a ||h||_p^b with the explicit
/// constant at the given points. Pass iff max LHS <= RHS (1 + tolerance).
inline BoundReport interpolation_lemma_check(const GridField& h, double beta, double p,
                                             std::span<const Vec2> points,
                                             double tolerance = 1e-2) {
  if (!(beta > 0.0 && beta < 2.0))
    throw PreconditionError("interpolation_lemma_check: beta must lie in (0, 2)");
  if (!(std::isinf(p) && p > 0.0) && !(p > 2.0 / (2.0 - beta)))
    throw PreconditionError("interpolation_lemma_check: need p > 2/(2 - beta) or p = inf, got p = " +
                            std::to_string(p) + " with beta = " + std::to_string(beta));
  if (h.values.size() != h.nx * h.ny || !(h.dx > 0.0) || !(h.dy > 0.0))
    throw PreconditionError("interpolation_lemma_check: malformed grid");
  for (double v : h.values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw PreconditionError("interpolation_lemma_check: h must be finite and nonnegative");

  BoundReport rep;
  rep.check_name = "interpolation_lemma";
  const double rhs = interpolation_rhs(h, beta, p);
  double max_lhs = 0.0;
  for (const Vec2& x : points) max_lhs = std::max(max_lhs, interpolation_lhs(h, x, beta));

  rep.constants["beta"] = beta;
  rep.constants["p"] = p;
  rep.constants["C"] = interpolation_constant(beta, p);
  rep.constants["L1"] = grid_l1_norm(h);
  rep.constants["Lp"] = grid_lp_norm(h, p);
  rep.constants["max_lhs"] = max_lhs;
  rep.constants["rhs"] = rhs;
  rep.samples = points.size();
  if (rhs == 0.0) {
    rep.margin = 0.0;
    rep.pass = max_lhs == 0.0;
    rep.notes.push_back("h = 0: both sides vanish");
    return rep;
  }
  rep.margin = max_lhs / rhs;
  rep.pass = max_lhs <= rhs * (1.0 + tolerance);
  return rep;
}

// Uniform sample points over the grid's bounding box grown by a quarter on each side.
inline std::vector<Vec2> lemma_sample_points(const GridField& h, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double w = h.nx * h.dx, ht = h.ny * h.dy;
  std::vector<Vec2> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = detail::uniform01(gen), v = detail::uniform01(gen);
    pts.push_back({h.x0 - 0.25 * w + 1.5 * w * u, h.y0 - 0.25 * ht + 1.5 * ht * v});
  }
  return pts;
}

inline BoundReport interpolation_lemma_check(const GridField& h, double beta, double p,
                                             std::size_t n_points = 100, std::uint64_t seed = 0,
                                             double tolerance = 1e-2) {
  const std::vector<Vec2> pts = lemma_sample_points(h, n_points, seed);
  return interpolation_lemma_check(h, beta, p, pts, tolerance);
}

/// Seeded nonnegative test field on [-1, 1]^2: a mix of sparse lognormal
/// cells and Gaussian bumps, with a random fraction of cells switched off.
inline GridField make_random_grid_field(std::uint64_t seed, std::size_t n = 32) {
  std::mt19937_64 gen(seed);
  GridField h;
  h.nx = h.ny = n;
  h.x0 = h.y0 = -1.0;
  h.dx = h.dy = 2.0 / static_cast<double>(n);
  h.values.assign(n * n, 0.0);
  const double fill = 0.05 + 0.95 * detail::uniform01(gen);
  const int bumps = static_cast<int>(detail::uniform01(gen) * 4.0);
  struct Bump { Vec2 c; double s, a; };
  std::vector<Bump> bs;
  for (int b = 0; b < bumps; ++b)
    bs.push_back({{2.0 * detail::uniform01(gen) - 1.0, 2.0 * detail::uniform01(gen) - 1.0},
                  0.05 + 0.4 * detail::uniform01(gen), 10.0 * detail::uniform01(gen)});
  std::normal_distribution<double> normal(0.0, 1.5);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 c{h.x0 + (i + 0.5) * h.dx, h.y0 + (j + 0.5) * h.dy};
      double v = 0.0;
      if (detail::uniform01(gen) < fill) v += std::exp(normal(gen));
      for (const Bump& b : bs) v += b.a * std::exp(-norm2(c - b.c) / (2.0 * b.s * b.s));
      h.values[j * n + i] = v;
    }
  return h;
}

// ---------------------------------------------------------------------------
// Far-field radial velocity decay

/// Probes max |u_r| on |x| = {8, 16, 32, 64} R0 around the recentered field and
/// fits the log-log slope. Pass iff slope <= -(3 + alpha) + 0.2. A field whose
/// radial velocity vanishes to roundoff passes vacuously.
inline BoundReport check_radial_decay(const Field& field, const KernelParams& params) {
  const ConservedQuantities q = conserved_quantities(field);
  const Field centered = translated(field, -q.center);
  const double R0 = support_radius(centered);
  const double alpha = params.alpha();
  const std::vector<double> radii = {8.0 * R0, 16.0 * R0, 32.0 * R0, 64.0 * R0};
  const std::vector<ProbeSample> probe = radial_velocity_probe(centered, params, radii, 64, false);

  BoundReport rep;
  rep.check_name = "radial_decay";
  rep.samples = probe.size();
  const double limit = -(3.0 + alpha) + 0.2;
  rep.constants["R0"] = R0;
  rep.constants["slope_limit"] = limit;
  // Monopole azimuthal speed at the innermost probe radius sets the roundoff scale.
  const double scale = q.mass * params.kernel_prefactor() / std::pow(radii.front(), 1.0 + alpha);
  double max_ur = 0.0;
  for (const ProbeSample& s : probe) max_ur = std::max(max_ur, s.max_radial_speed);
  if (max_ur <= 1e-12 * scale) {
    rep.pass = true;
    rep.margin = 0.0;
    rep.constants["slope"] = std::numeric_limits<double>::quiet_NaN();
    rep.notes.push_back("symmetric: decay check vacuous");
    return rep;
  }
  std::vector<double> lx, ly;
  for (const ProbeSample& s : probe) {
    rep.constants["max_ur_r" + std::to_string(static_cast<int>(std::lround(s.r / R0)))] =
        s.max_radial_speed;
    lx.push_back(std::log(s.r));
    ly.push_back(std::log(s.max_radial_speed));
  }
  const double slope = fit_slope(lx, ly);
  rep.constants["slope"] = slope;
  // 0 at the exact decay rate -(3+alpha), 1 at the tolerance edge.
  rep.margin = (slope + 3.0 + alpha) / 0.2;
  rep.pass = slope <= limit;
  return rep;
}

}  // namespace alphapatch
