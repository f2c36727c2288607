#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "alphapatch/diagnostics.hpp"
#include "alphapatch/errors.hpp"
#include "alphapatch/fields.hpp"
#include "alphapatch/kernel.hpp"
#include "alphapatch/quadrature.hpp"
#include "alphapatch/vec2.hpp"

namespace alphapatch {

enum class Representation { particles, contour };

inline const char* to_string(Representation r) {
  return r == Representation::particles ? "particles" : "contour";
}

// Tagged description of the initial temperature field. All shapes fit in the
// ball |x| <= R0 centred at the origin.
struct InitialCondition {
  std::string type = "disk";  // disk | annulus | two-disks | random-blobs | ellipse
  double R0 = 1.0;
  double theta0 = 1.0;
  double inner_radius = 0.5;  // annulus
  int n_blobs = 4;            // random-blobs
  double aspect = 2.0;        // ellipse: semi-axes R0 and R0 / aspect

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct SimConfig {
  double alpha = 0.5;
  double dt = 0.05;
  double t_end = 0.0;
  std::string integrator = "rk4";
  Representation representation = Representation::particles;
  int output_stride = 10;
  std::uint64_t seed = 0;
  InitialCondition initial_condition;
  std::size_t n_particles = 4096;
  std::size_t n_nodes = 512;
  std::optional<double> eps;  // blob radius; default 0.5 * mean particle spacing
  int n_max = kDefaultMomentCount;
  int snapshot_every = 1;     // keep the field of every k-th diagnostics record

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void validate(const SimConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha", "alpha outside (0,1]");
  if (!(c.dt > 0.0)) throw ConfigError("dt", "dt must be > 0");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end", "t_end must be >= 0");
  if (c.integrator != "rk4") throw ConfigError("integrator", "only rk4 is supported");
  if (c.output_stride < 1) throw ConfigError("output_stride", "output_stride must be >= 1");
  if (c.snapshot_every < 1) throw ConfigError("snapshot_every", "snapshot_every must be >= 1");
  if (c.n_max < 1) throw ConfigError("n_max", "n_max must be >= 1");
  if (c.n_particles < 1) throw ConfigError("n_particles", "n_particles must be >= 1");
  if (c.n_nodes < kMinContourNodes) throw ConfigError("n_nodes", "n_nodes must be >= 16");
  if (c.eps && !(*c.eps > 0.0)) throw ConfigError("eps", "eps must be > 0");
  const InitialCondition& ic = c.initial_condition;
  if (!(ic.R0 > 0.0)) throw ConfigError("initial_condition.R0", "R0 must be > 0");
  if (!(ic.theta0 > 0.0)) throw ConfigError("initial_condition.theta0", "theta0 must be > 0");
  if (ic.type == "annulus" && !(ic.inner_radius > 0.0 && ic.inner_radius < ic.R0))
    throw ConfigError("initial_condition.inner_radius", "inner_radius must lie in (0, R0)");
  if (ic.type == "random-blobs" && ic.n_blobs < 1)
    throw ConfigError("initial_condition.n_blobs", "n_blobs must be >= 1");
  if (ic.type == "ellipse" && !(ic.aspect >= 1.0))
    throw ConfigError("initial_condition.aspect", "aspect must be >= 1");
  static const char* kTypes[] = {"disk", "annulus", "two-disks", "random-blobs", "ellipse"};
  if (std::find(std::begin(kTypes), std::end(kTypes), ic.type) == std::end(kTypes))
    throw ConfigError("initial_condition.type", "unknown initial condition '" + ic.type + "'");
  if (c.representation == Representation::contour) {
    if (ic.type != "disk" && ic.type != "ellipse")
      throw ConfigError("initial_condition.type",
                        "'" + ic.type + "' has no single-contour representation");
    if (c.alpha >= 1.0)
      throw ConfigError("alpha", "contour dynamics needs alpha < 1 (boundary integrand not integrable)");
  }
}

struct Snapshot {
  double t = 0.0;
  std::size_t step = 0;
  std::optional<Field> field;  // present on every snapshot_every-th record
  DiagnosticsRecord diagnostics;
};

struct Trajectory {
  double alpha = 0.5;
  double R0 = 0.0;       // support radius of the initial field
  double dt = 0.0;       // effective step (t_end divided into whole steps)
  std::vector<Snapshot> snapshots;
};

// ---------------------------------------------------------------------------
// Initial conditions

namespace detail {

// Portable uniform in [0, 1) from the raw 64-bit engine output.
inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Area-uniform sunflower points in the unit disk.
inline Vec2 sunflower(std::size_t k, std::size_t n) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double r = std::sqrt((static_cast<double>(k) + 0.5) / static_cast<double>(n));
  const double th = golden * static_cast<double>(k);
  return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace detail

inline ParticleField make_particle_field(const SimConfig& cfg) {
  const InitialCondition& ic = cfg.initial_condition;
  const std::size_t n = cfg.n_particles;
  ParticleField f;
  f.positions.reserve(n);
  f.weights.reserve(n);
  double total_area = 0.0;

  if (ic.type == "disk" || ic.type == "ellipse") {
    const double ax = ic.R0, ay = ic.type == "ellipse" ? ic.R0 / ic.aspect : ic.R0;
    total_area = std::numbers::pi * ax * ay;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 u = detail::sunflower(k, n);
      f.positions.push_back({ax * u.x1, ay * u.x2});
      f.weights.push_back(ic.theta0 * total_area / n);
    }
    f.max_theta_density = ic.theta0;
  } else if (ic.type == "annulus") {
    const double ri = ic.inner_radius, ro = ic.R0;
    total_area = std::numbers::pi * (ro * ro - ri * ri);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < n; ++k) {
      const double frac = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
      const double r = std::sqrt(ri * ri + frac * (ro * ro - ri * ri));
      const double th = golden * static_cast<double>(k);
      f.positions.push_back({r * std::cos(th), r * std::sin(th)});
      f.weights.push_back(ic.theta0 * total_area / n);
    }
    f.max_theta_density = ic.theta0;
  } else if (ic.type == "two-disks") {
    // Unequal disks so the field has no rotational symmetry.
    const Vec2 c1{-0.45 * ic.R0, 0.0}, c2{0.55 * ic.R0, 0.0};
    const double r1 = 0.5 * ic.R0, r2 = 0.35 * ic.R0;
    const double a1 = std::numbers::pi * r1 * r1, a2 = std::numbers::pi * r2 * r2;
    total_area = a1 + a2;
    if (n < 2) throw ConfigError("n_particles", "two-disks needs at least 2 particles");
    const auto n1 = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(n * a1 / total_area), 1, static_cast<long long>(n) - 1));
    const std::size_t n2 = n - n1;
    for (std::size_t k = 0; k < n1; ++k) {
      f.positions.push_back(c1 + detail::sunflower(k, n1) * r1);
      f.weights.push_back(ic.theta0 * a1 / n1);
    }
    for (std::size_t k = 0; k < n2; ++k) {
      f.positions.push_back(c2 + detail::sunflower(k, n2) * r2);
      f.weights.push_back(ic.theta0 * a2 / n2);
    }
    f.max_theta_density = ic.theta0;
  } else if (ic.type == "random-blobs") {
    // Superposition of seeded Gaussian bumps, truncated to |x| <= R0.
    struct Blob { Vec2 c; double sigma, amp; };
    std::mt19937_64 gen(cfg.seed);
    std::vector<Blob> blobs;
    for (int b = 0; b < ic.n_blobs; ++b) {
      const double rr = 0.6 * ic.R0 * std::sqrt(detail::uniform01(gen));
      const double th = 2.0 * std::numbers::pi * detail::uniform01(gen);
      const double sigma = ic.R0 * (0.15 + 0.2 * detail::uniform01(gen));
      const double amp = ic.theta0 * (0.5 + 0.5 * detail::uniform01(gen));
      blobs.push_back({{rr * std::cos(th), rr * std::sin(th)}, sigma, amp});
    }
    total_area = std::numbers::pi * ic.R0 * ic.R0;
    double theta_max = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 x = detail::sunflower(k, n) * ic.R0;
      double theta = 0.0;
      for (const Blob& b : blobs)
        theta += b.amp * std::exp(-norm2(x - b.c) / (2.0 * b.sigma * b.sigma));
      theta_max = std::max(theta_max, theta);
      f.positions.push_back(x);
      f.weights.push_back(theta * total_area / n);
    }
    f.max_theta_density = theta_max;
  } else {
    throw ConfigError("initial_condition.type", "unknown initial condition '" + ic.type + "'");
  }
  f.eps = cfg.eps ? *cfg.eps : 0.5 * std::sqrt(total_area / static_cast<double>(n));
  validate(f);
  return f;
}

inline ContourPatch redistribute_nodes(const ContourPatch& patch);

inline ContourPatch make_contour_patch(const SimConfig& cfg) {
  const InitialCondition& ic = cfg.initial_condition;
  const std::size_t n = cfg.n_nodes;
  ContourPatch patch;
  patch.theta0 = ic.theta0;
  const double ay = ic.type == "ellipse" ? ic.R0 / ic.aspect : ic.R0;
  if (ic.type != "disk" && ic.type != "ellipse")
    throw ConfigError("initial_condition.type", "'" + ic.type + "' has no single-contour representation");
  patch.nodes.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    patch.nodes.push_back({ic.R0 * std::cos(th), ay * std::sin(th)});
  }
  patch.target_spacing = perimeter(patch.nodes) / static_cast<double>(n);
  if (ic.type == "ellipse") patch = redistribute_nodes(patch);
  validate(patch);
  return patch;
}

inline Field make_initial_field(const SimConfig& cfg) {
  validate(cfg);
  if (cfg.representation == Representation::particles) return make_particle_field(cfg);
  return make_contour_patch(cfg);
}

// ---------------------------------------------------------------------------
// Node redistribution

namespace detail {

// Solves the cyclic tridiagonal system
//   sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]   (indices mod n)
// by Sherman-Morrison on top of the Thomas algorithm. Requires n >= 3.
inline std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& sub,
                                                    const std::vector<double>& diag,
                                                    const std::vector<double>& sup,
                                                    const std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  const double alpha = sup[n - 1];  // corner (n-1, 0)
  const double beta = sub[0];       // corner (0, n-1)
  const double gamma = -diag[0];
  std::vector<double> b = diag;
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;

  auto thomas = [&](const std::vector<double>& r) {
    std::vector<double> c(n), d(n), x(n);
    c[0] = sup[0] / b[0];
    d[0] = r[0] / b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = b[i] - sub[i] * c[i - 1];
      c[i] = sup[i] / m;
      d[i] = (r[i] - sub[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  };
  std::vector<double> x = thomas(rhs);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  std::vector<double> z = thomas(u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

// Periodic cubic spline through the nodes, parametrized by chord length.
class PeriodicSpline {
 public:
  explicit PeriodicSpline(const Points& p) : p_(p) {
    const std::size_t n = p.size();
    h_.resize(n);
    for (std::size_t i = 0; i < n; ++i) h_[i] = norm(p[(i + 1) % n] - p[i]);
    std::vector<double> sub(n), diag(n), sup(n), rx(n), ry(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n;
      sub[i] = h_[im];
      diag[i] = 2.0 * (h_[im] + h_[i]);
      sup[i] = h_[i];
      const Vec2 r = (p[(i + 1) % n] - p[i]) / h_[i] - (p[i] - p[im]) / h_[im];
      rx[i] = 6.0 * r.x1;
      ry[i] = 6.0 * r.x2;
    }
    const std::vector<double> mx = solve_cyclic_tridiagonal(sub, diag, sup, rx);
    const std::vector<double> my = solve_cyclic_tridiagonal(sub, diag, sup, ry);
    m_.resize(n);
    for (std::size_t i = 0; i < n; ++i) m_[i] = {mx[i], my[i]};
  }

  std::size_t size() const { return p_.size(); }
  double knot_length(std::size_t i) const { return h_[i]; }

  Vec2 value(std::size_t i, double tau) const {
    const std::size_t j = (i + 1) % p_.size();
    const double h = h_[i];
    const Vec2 b = (p_[j] - p_[i]) / h - (m_[i] * 2.0 + m_[j]) * (h / 6.0);
    return p_[i] + b * tau + m_[i] * (0.5 * tau * tau) + (m_[j] - m_[i]) * (tau * tau * tau / (6.0 * h));
  }

  Vec2 derivative(std::size_t i, double tau) const {
    const std::size_t j = (i + 1) % p_.size();
    const double h = h_[i];
    const Vec2 b = (p_[j] - p_[i]) / h - (m_[i] * 2.0 + m_[j]) * (h / 6.0);
    return b + m_[i] * tau + (m_[j] - m_[i]) * (0.5 * tau * tau / h);
  }

  double arc_length(std::size_t i, double tau) const {
    return integrate_gl<8>([&](double s) { return norm(derivative(i, s)); }, 0.0, tau);
  }

 private:
  const Points& p_;
  std::vector<double> h_;
  std::vector<Vec2> m_;
};

// Outward unit normals at the nodes of a counterclockwise polygon.
inline Points vertex_normals(const Points& p) {
  const std::size_t n = p.size();
  Points out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 t = p[(i + 1) % n] - p[(i + n - 1) % n];
    out[i] = Vec2{t.x2, -t.x1} / norm(t);
  }
  return out;
}

}  // namespace detail

/// Resamples the contour at uniform arc length along a periodic cubic spline
/// through the current nodes, starting from node 0. The node count becomes
/// round(length / target_spacing) (at least 16). A final offset along the
/// vertex normals restores the polygon area.
inline ContourPatch redistribute_nodes(const ContourPatch& patch) {
  validate(patch);
  const Points& p = patch.nodes;
  const std::size_t n = p.size();
  const detail::PeriodicSpline spline(p);

  std::vector<double> cumulative(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    cumulative[i + 1] = cumulative[i] + spline.arc_length(i, spline.knot_length(i));
  const double total = cumulative[n];

  std::size_t m = n;
  if (patch.target_spacing > 0.0)
    m = std::max<std::size_t>(kMinContourNodes,
                              static_cast<std::size_t>(std::llround(total / patch.target_spacing)));
  const double ds = total / static_cast<double>(m);

  ContourPatch out;
  out.theta0 = patch.theta0;
  out.target_spacing = patch.target_spacing;
  out.nodes.resize(m);
  out.nodes[0] = p[0];
  std::size_t seg = 0;
  for (std::size_t k = 1; k < m; ++k) {
    const double s = ds * static_cast<double>(k);
    while (seg + 1 < n && cumulative[seg + 1] <= s) ++seg;
    const double local = s - cumulative[seg];
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double h = spline.knot_length(seg);
    double tau = h * std::clamp(local / seg_len, 0.0, 1.0);
    for (int it = 0; it < 20; ++it) {
      const double f = spline.arc_length(seg, tau) - local;
      const double step = f / norm(spline.derivative(seg, tau));
      tau = std::clamp(tau - step, 0.0, h);
      if (std::abs(step) < 1e-15 * h) break;
    }
    out.nodes[k] = spline.value(seg, tau);
  }

  const double target_area = signed_area(p);
  for (int it = 0; it < 3; ++it) {
    const double deficit = target_area - signed_area(out.nodes);
    if (std::abs(deficit) <= 1e-15 * std::abs(target_area)) break;
    const double offset = deficit / perimeter(out.nodes);
    const Points normals = detail::vertex_normals(out.nodes);
    for (std::size_t k = 0; k < m; ++k) out.nodes[k] += normals[k] * offset;
  }
  validate(out);
  return out;
}

// ---------------------------------------------------------------------------
// Time stepping

inline const Points& material_points(const Field& f) {
  return std::visit([](const auto& g) -> const Points& {
    if constexpr (std::is_same_v<std::decay_t<decltype(g)>, ParticleField>) return g.positions;
    else return g.nodes;
  }, f);
}

inline Points& material_points(Field& f) {
  return std::visit([](auto& g) -> Points& {
    if constexpr (std::is_same_v<std::decay_t<decltype(g)>, ParticleField>) return g.positions;
    else return g.nodes;
  }, f);
}

/// Velocity of every particle or contour node under the field's own flow.
inline Points rhs(const Field& field, const KernelParams& params) {
  if (const auto* pf = std::get_if<ParticleField>(&field))
    return velocity_particles(pf->positions, *pf, params);
  const auto& patch = std::get<ContourPatch>(field);
  if (params.alpha() >= 1.0)
    throw DomainError("contour dynamics needs alpha < 1: boundary integrand is not integrable");
  return velocity_contour(patch.nodes, patch, params);
}

/// One classical RK4 step of all material points. Weights, theta0 and eps
/// are carried over unchanged. `t` and `step` only label a blow-up error.
inline Field step_rk4(const Field& field, double dt, const KernelParams& params, double t = 0.0,
                      std::size_t step = 0) {
  if (!(dt > 0.0)) throw PreconditionError("step_rk4: dt must be > 0");
  const Points& x0 = material_points(field);
  const std::size_t n = x0.size();

  Field stage = field;
  auto at = [&](const Points& k, double h) -> const Field& {
    Points& xs = material_points(stage);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x0[i] + k[i] * h;
    return stage;
  };
  const Points k1 = rhs(field, params);
  const Points k2 = rhs(at(k1, 0.5 * dt), params);
  const Points k3 = rhs(at(k2, 0.5 * dt), params);
  const Points k4 = rhs(at(k3, dt), params);

  Field out = field;
  Points& x = material_points(out);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = x0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
    if (!is_finite(x[i]))
      throw BlowUpError("non-finite position at step " + std::to_string(step + 1), t + dt, step + 1);
  }
  return out;
}

using SnapshotObserver = std::function<void(const Snapshot&)>;

/// Integrates the configured initial condition to t_end. t_end is split into
/// ceil(t_end / dt) equal steps. A diagnostics record is emitted every
/// output_stride steps and at the final step; `observer` sees each snapshot as
/// it is produced so partial output survives a failure.
inline Trajectory evolve(const SimConfig& cfg, const SnapshotObserver& observer = {}) {
  validate(cfg);
  const KernelParams params(cfg.alpha);
  Field field = make_initial_field(cfg);

  Trajectory traj;
  traj.alpha = cfg.alpha;
  traj.R0 = support_radius(field);
  const std::size_t n_steps =
      cfg.t_end > 0.0 ? static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9)) : 0;
  const double dt = n_steps > 0 ? cfg.t_end / static_cast<double>(n_steps) : cfg.dt;
  traj.dt = dt;

  std::size_t records = 0;
  auto emit = [&](std::size_t step, double t) {
    Snapshot s;
    s.t = t;
    s.step = step;
    s.diagnostics = compute_diagnostics(field, t, cfg.alpha, cfg.n_max);
    if (records % static_cast<std::size_t>(cfg.snapshot_every) == 0 || step == n_steps)
      s.field = field;
    ++records;
    if (observer) observer(s);
    traj.snapshots.push_back(std::move(s));
  };

  emit(0, 0.0);
  for (std::size_t step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    const double t_next = static_cast<double>(step + 1) * dt;
    try {
      field = step_rk4(field, dt, params, t, step);
      if (auto* patch = std::get_if<ContourPatch>(&field)) *patch = redistribute_nodes(*patch);
    } catch (const InvalidGeometryError& e) {
      // Raised by a stage evaluation or the redistribution; label it with this step.
      throw InvalidGeometryError(e.what(), t_next, step + 1);
    }
    if ((step + 1) % static_cast<std::size_t>(cfg.output_stride) == 0 || step + 1 == n_steps)
      emit(step + 1, t_next);
  }
  return traj;
}

}  // namespace alphapatch
