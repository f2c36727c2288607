#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "alphapatch/errors.hpp"
#include "alphapatch/fields.hpp"
#include "alphapatch/kernel.hpp"
#include "alphapatch/quadrature.hpp"
#include "alphapatch/vec2.hpp"

namespace alphapatch {

inline constexpr int kDefaultMomentCount = 6;

struct ConservedQuantities {
  double mass = 0.0;
  double max_theta = 0.0;
  Vec2 center;
  double inertia = 0.0;  // \int |x|^2 theta
};

// Per-snapshot diagnostics; moments[n - 1] holds m_{n,alpha}.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double max_theta = 0.0;
  Vec2 center;
  double inertia = 0.0;
  double support_radius = 0.0;
  std::vector<double> moments;
};

// ---------------------------------------------------------------------------
// Conserved quantities

inline ConservedQuantities conserved_quantities(const ParticleField& f) {
  ConservedQuantities q;
  Vec2 first{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) {
    q.mass += f.weights[i];
    first += f.positions[i] * f.weights[i];
    q.inertia += f.weights[i] * norm2(f.positions[i]);
  }
  q.center = first / q.mass;
  q.max_theta = f.max_theta_density;
  return q;
}

// Exact polygon integrals of 1, x and |x|^2, scaled by theta0.
inline ConservedQuantities conserved_quantities(const ContourPatch& patch) {
  const Points& p = patch.nodes;
  const std::size_t n = p.size();
  double area = 0.0, second = 0.0;
  Vec2 first{0.0, 0.0};
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = p[j];
    const Vec2& b = p[i];
    const double c = cross(a, b);
    area += c;
    first += (a + b) * c;
    second += c * (norm2(a) + dot(a, b) + norm2(b));
  }
  area *= 0.5;
  ConservedQuantities q;
  q.mass = patch.theta0 * area;
  q.center = first / (6.0 * area);
  q.inertia = patch.theta0 * second / 12.0;
  q.max_theta = patch.theta0;
  return q;
}

inline ConservedQuantities conserved_quantities(const Field& f) {
  return std::visit([](const auto& g) { return conserved_quantities(g); }, f);
}

// ---------------------------------------------------------------------------
// Support radius, measured from the origin

// Particles: theta-mass sits at the centers; the blob radius is added on top.
inline double support_radius(const ParticleField& f) {
  double r = 0.0;
  for (const Vec2& x : f.positions) r = std::max(r, norm(x));
  return r + f.eps;
}

inline double support_radius(const ContourPatch& patch) {
  double r = 0.0;
  for (const Vec2& x : patch.nodes) r = std::max(r, norm(x));
  return r;
}

inline double support_radius(const Field& f) {
  return std::visit([](const auto& g) { return support_radius(g); }, f);
}

// ---------------------------------------------------------------------------
// Generalized moments m_{n,alpha} = \int |x|^{(4+alpha) n} theta dx

namespace detail {

inline double checked_exp(double log_value, const char* what) {
  if (log_value > std::log(std::numeric_limits<double>::max()))
    throw RangeError(std::string(what) + ": result exceeds the double range");
  return std::exp(log_value);
}

inline void check_moment_args(int n, double alpha) {
  if (n < 1) throw PreconditionError("moment: n must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw PreconditionError("moment: alpha must lie in [0, 1]");
}

}  // namespace detail

// Log-sum-exp over particles, so large radii and orders do not overflow early.
inline double moment(const ParticleField& f, int n, double alpha) {
  detail::check_moment_args(n, alpha);
  const double power = (4.0 + alpha) * n;
  double log_max = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = norm(f.positions[i]);
    logs[i] = r > 0.0 ? std::log(f.weights[i]) + power * std::log(r)
                      : -std::numeric_limits<double>::infinity();
    log_max = std::max(log_max, logs[i]);
  }
  if (log_max == -std::numeric_limits<double>::infinity()) return 0.0;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - log_max);
  return detail::checked_exp(log_max + std::log(s), "moment");
}

/// Polygon moment by the radial divergence identity
///     \int_Omega |x|^p dx = 1/(p+2) \oint |x|^p (x dy - y dx),
/// which on a straight edge a->b reduces to cross(a, b)/(p+2) \int_0^1 |a + s(b-a)|^p ds.
/// Edges passing close to the origin are subdivided. Values are scaled by the
/// largest node radius so that only the final exponentiation can overflow.
inline double moment(const ContourPatch& patch, int n, double alpha) {
  detail::check_moment_args(n, alpha);
  const double power = (4.0 + alpha) * n;
  const Points& p = patch.nodes;
  double rmax = 0.0;
  for (const Vec2& v : p) rmax = std::max(rmax, norm(v));
  if (rmax == 0.0) return 0.0;

  double sum = 0.0;
  const std::size_t m = p.size();
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Vec2 a = p[j] / rmax;
    const Vec2 b = p[i] / rmax;
    const double c = cross(a, b);
    if (c == 0.0) continue;
    const Vec2 ab = b - a;
    const double len = norm(ab);
    const double t = std::clamp(-dot(a, ab) / norm2(ab), 0.0, 1.0);
    const double dist = norm(a + ab * t);
    const int pieces = dist > 0.0 ? std::clamp(static_cast<int>(std::ceil(2.0 * len / dist)), 1, 64)
                                  : 64;
    auto f = [&](double s) { return std::pow(norm2(a + ab * s), 0.5 * power); };
    double edge = 0.0;
    for (int k = 0; k < pieces; ++k)
      edge += integrate_gl<8>(f, static_cast<double>(k) / pieces, static_cast<double>(k + 1) / pieces);
    sum += c * edge;
  }
  sum *= patch.theta0 / (power + 2.0);
  if (sum <= 0.0) return 0.0;
  return detail::checked_exp(std::log(sum) + (power + 2.0) * std::log(rmax), "moment");
}

inline double moment(const Field& f, int n, double alpha) {
  return std::visit([&](const auto& g) { return moment(g, n, alpha); }, f);
}

inline double moment(const Field& f, int n, const KernelParams& params) {
  return moment(f, n, params.alpha());
}

// ---------------------------------------------------------------------------
// Tail mass: theta-mass strictly outside radius r

inline double tail_mass(const ParticleField& f, double r) {
  if (!(r >= 0.0)) throw PreconditionError("tail_mass: r must be >= 0");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (norm(f.positions[i]) > r) s += f.weights[i];
  return s;
}

/// Signed area of polygon intersected with the disk |x| <= r: each edge
/// contributes its origin triangle clipped to the disk (triangle pieces
/// inside, circular sectors outside).
inline double polygon_disk_intersection_area(const Points& p, double r) {
  if (r <= 0.0) return 0.0;
  const double r2 = r * r;
  double area = 0.0;
  auto piece = [&](const Vec2& u, const Vec2& v) {
    const Vec2 mid = (u + v) * 0.5;
    if (norm2(mid) <= r2) return 0.5 * cross(u, v);
    return 0.5 * r2 * std::atan2(cross(u, v), dot(u, v));
  };
  const std::size_t n = p.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = p[j];
    const Vec2& b = p[i];
    const Vec2 d = b - a;
    // |a + s d|^2 = r^2
    const double qa = norm2(d), qb = 2.0 * dot(a, d), qc = norm2(a) - r2;
    double cuts[2];
    int ncut = 0;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa > 0.0 && disc > 0.0) {
      const double sq = std::sqrt(disc);
      const double s1 = (-qb - sq) / (2.0 * qa), s2 = (-qb + sq) / (2.0 * qa);
      if (s1 > 0.0 && s1 < 1.0) cuts[ncut++] = s1;
      if (s2 > 0.0 && s2 < 1.0) cuts[ncut++] = s2;
    }
    Vec2 prev = a;
    for (int k = 0; k < ncut; ++k) {
      const Vec2 q = a + d * cuts[k];
      area += piece(prev, q);
      prev = q;
    }
    area += piece(prev, b);
  }
  return area;
}

inline double tail_mass(const ContourPatch& patch, double r) {
  if (!(r >= 0.0)) throw PreconditionError("tail_mass: r must be >= 0");
  const double total = signed_area(patch.nodes);
  const double inside = polygon_disk_intersection_area(patch.nodes, r);
  return patch.theta0 * std::max(0.0, total - inside);
}

inline double tail_mass(const Field& f, double r) {
  return std::visit([&](const auto& g) { return tail_mass(g, r); }, f);
}

// ---------------------------------------------------------------------------
// Far-field radial velocity probe

struct ProbeSample {
  double r = 0.0;
  double max_radial_speed = 0.0;
};

inline Points velocity_at(std::span<const Vec2> targets, const Field& f, const KernelParams& params) {
  if (const auto* pf = std::get_if<ParticleField>(&f)) return velocity_particles(targets, *pf, params);
  return velocity_contour(targets, std::get<ContourPatch>(f), params);
}

/// Max over n_angles points on each circle |x| = r of |x/|x| . u(x)|.
///
/// The field is first translated so its center of mass sits at the origin;
/// the caller's field is untouched. With recenter = false the raw field is probed.
inline std::vector<ProbeSample> radial_velocity_probe(const Field& field, const KernelParams& params,
                                                      std::span<const double> radii, int n_angles,
                                                      bool recenter = true) {
  if (n_angles < 32) throw PreconditionError("radial_velocity_probe: n_angles must be >= 32");
  const Field probe = recenter ? translated(field, -conserved_quantities(field).center) : field;
  const double r_supp = support_radius(probe);
  for (double r : radii)
    if (!(r > r_supp))
      throw PreconditionError("radial_velocity_probe: radius " + std::to_string(r) +
                              " is inside the support radius " + std::to_string(r_supp));

  Points targets;
  targets.reserve(radii.size() * n_angles);
  for (double r : radii)
    for (int k = 0; k < n_angles; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n_angles;
      targets.push_back({r * std::cos(th), r * std::sin(th)});
    }
  const Points u = velocity_at(targets, probe, params);

  std::vector<ProbeSample> out;
  out.reserve(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    double best = 0.0;
    for (int k = 0; k < n_angles; ++k) {
      const std::size_t idx = i * n_angles + k;
      const Vec2& x = targets[idx];
      best = std::max(best, std::abs(dot(x, u[idx])) / norm(x));
    }
    out.push_back({radii[i], best});
  }
  return out;
}

// ---------------------------------------------------------------------------

inline DiagnosticsRecord compute_diagnostics(const Field& field, double t, double alpha,
                                             int n_max = kDefaultMomentCount) {
  const ConservedQuantities q = conserved_quantities(field);
  DiagnosticsRecord rec;
  rec.t = t;
  rec.mass = q.mass;
  rec.max_theta = q.max_theta;
  rec.center = q.center;
  rec.inertia = q.inertia;
  rec.support_radius = support_radius(field);
  rec.moments.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) rec.moments.push_back(moment(field, n, alpha));
  return rec;
}

}  // namespace alphapatch
