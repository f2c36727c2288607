#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "alphapatch/errors.hpp"
#include "alphapatch/vec2.hpp"

namespace alphapatch {

/// Regularized Lagrangian discretization of a positive temperature field.
///
/// Particle i carries temperature mass weights[i] (units of theta * area) at
/// positions[i]; eps is the blob radius used to mollify the kernel and
/// max_theta_density is the theta value each particle stands for.
struct ParticleField {
  Points positions;
  std::vector<double> weights;
  double eps = 0.0;
  double max_theta_density = 1.0;

  std::size_t size() const { return positions.size(); }
};

inline void validate(const ParticleField& f) {
  if (f.positions.empty()) throw PreconditionError("ParticleField: no particles");
  if (f.positions.size() != f.weights.size())
    throw PreconditionError("ParticleField: positions and weights differ in length");
  if (!(f.eps > 0.0)) throw PreconditionError("ParticleField: eps must be positive");
  if (!(f.max_theta_density > 0.0))
    throw PreconditionError("ParticleField: max_theta_density must be positive");
  for (double w : f.weights)
    if (!(w > 0.0)) throw PreconditionError("ParticleField: weights must be positive");
}

/// Boundary of a constant-theta patch: a closed, counterclockwise polyline.
/// The closing edge nodes.back() -> nodes.front() is implicit.
struct ContourPatch {
  Points nodes;
  double theta0 = 1.0;
  double target_spacing = 0.0;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr std::size_t kMinContourNodes = 16;

using Field = std::variant<ParticleField, ContourPatch>;

// ---------------------------------------------------------------------------
// Polygon geometry

inline double signed_area(const Points& p) {
  double a = 0.0;
  const std::size_t n = p.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) a += cross(p[j], p[i]);
  return 0.5 * a;
}

inline double perimeter(const Points& p) {
  double s = 0.0;
  const std::size_t n = p.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) s += norm(p[i] - p[j]);
  return s;
}

namespace detail {

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x1, b.x1) <= p.x1 && p.x1 <= std::max(a.x1, b.x1) &&
         std::min(a.x2, b.x2) <= p.x2 && p.x2 <= std::max(a.x2, b.x2);
}

inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace detail

// True if any two non-adjacent edges of the closed polygon touch or cross.
inline bool has_self_intersection(const Points& p) {
  const std::size_t n = p.size();
  if (n < 4) return false;
  struct Box { double x0, x1, y0, y1; };
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = p[i];
    const Vec2& b = p[(i + 1) % n];
    boxes[i] = {std::min(a.x1, b.x1), std::max(a.x1, b.x1), std::min(a.x2, b.x2),
                std::max(a.x2, b.x2)};
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // share node 0
      const Box& bi = boxes[i];
      const Box& bj = boxes[j];
      if (bi.x1 < bj.x0 || bj.x1 < bi.x0 || bi.y1 < bj.y0 || bj.y1 < bi.y0) continue;
      if (detail::segments_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n])) return true;
    }
  }
  return false;
}

// Checks the ContourPatch invariants that do not depend on spacing.
inline void validate(const ContourPatch& patch) {
  if (patch.nodes.size() < kMinContourNodes)
    throw InvalidGeometryError("contour has " + std::to_string(patch.nodes.size()) +
                               " nodes, need at least " + std::to_string(kMinContourNodes));
  for (const Vec2& v : patch.nodes)
    if (!is_finite(v)) throw InvalidGeometryError("contour has a non-finite node");
  if (!(patch.theta0 > 0.0)) throw PreconditionError("ContourPatch: theta0 must be positive");
  if (!(signed_area(patch.nodes) > 0.0))
    throw InvalidGeometryError("contour is not counterclockwise");
  if (has_self_intersection(patch.nodes)) throw InvalidGeometryError("contour self-intersects");
}

inline ParticleField translated(ParticleField f, const Vec2& shift) {
  for (Vec2& x : f.positions) x += shift;
  return f;
}

inline ContourPatch translated(ContourPatch p, const Vec2& shift) {
  for (Vec2& x : p.nodes) x += shift;
  return p;
}

inline Field translated(const Field& f, const Vec2& shift) {
  return std::visit([&](const auto& g) -> Field { return translated(g, shift); }, f);
}

}  // namespace alphapatch
