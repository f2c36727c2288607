#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "alphapatch/errors.hpp"
#include "alphapatch/fields.hpp"
#include "alphapatch/gamma.hpp"
#include "alphapatch/parallel.hpp"
#include "alphapatch/quadrature.hpp"
#include "alphapatch/simd_math.hpp"
#include "alphapatch/vec2.hpp"

namespace alphapatch {

/// Magnitude of the Riesz-potential constant for (-Delta)^{-(1 - alpha/2)} in the plane:
///
///     c(alpha) = Gamma(alpha/2) / (pi 2^{2-alpha} Gamma((2-alpha)/2))
///
/// so that G(r) = c(alpha) r^{-alpha}. Defined for alpha in (0, 2).
inline double riesz_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw DomainError("riesz_constant: alpha must lie in (0, 2), got " + std::to_string(alpha));
  return gamma_fn(0.5 * alpha) /
         (std::numbers::pi * std::exp2(2.0 - alpha) * gamma_fn(1.0 - 0.5 * alpha));
}

// The one home of alpha and the constants derived from it.
class KernelParams {
 public:
  explicit KernelParams(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw DomainError("alpha outside (0,1]: " + std::to_string(alpha));
    riesz_ = alphapatch::riesz_constant(alpha);
    prefactor_ = alpha * riesz_;
  }

  double alpha() const { return alpha_; }
  double riesz_constant() const { return riesz_; }
  // alpha * riesz_constant; tends to 1/(2 pi) as alpha -> 0.
  double kernel_prefactor() const { return prefactor_; }
  // alpha = 1 is the SQG endpoint; supported but outside the validated range.
  bool experimental() const { return alpha_ >= 1.0; }

 private:
  double alpha_;
  double riesz_;
  double prefactor_;
};

/// K(z) = prefactor z^perp / |z|^{2+alpha}, the perpendicular gradient of G.
inline Vec2 kernel_eval(const Vec2& z, const KernelParams& params) {
  const double r2 = norm2(z);
  if (r2 == 0.0) throw SingularityError("kernel_eval: singular at z = 0");
  const double f = params.kernel_prefactor() * std::pow(r2, -0.5 * (2.0 + params.alpha()));
  return perp(z) * f;
}

/// Mollified kernel prefactor z^perp / (|z|^2 + eps^2)^{(2+alpha)/2}; vanishes at z = 0.
inline Vec2 kernel_eval_blob(const Vec2& z, double eps, const KernelParams& params) {
  const double s = norm2(z) + eps * eps;
  const double f = params.kernel_prefactor() * std::pow(s, -0.5 * (2.0 + params.alpha()));
  return perp(z) * f;
}

namespace detail {

// Structure-of-arrays copy of the sources for the vectorized inner loop.
struct SourceArrays {
  std::vector<double> x, y, w;
  explicit SourceArrays(const ParticleField& field) {
    const std::size_t n = field.size();
    x.resize(n);
    y.resize(n);
    w.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = field.positions[j].x1;
      y[j] = field.positions[j].x2;
      w[j] = field.weights[j];
    }
  }
};

// Blob-regularized sum at one target. The simd reduction fixes the
// accumulation order for a given build, so results are reproducible.
inline Vec2 blob_sum(double xi, double yi, const SourceArrays& src, double eps2, double half_alpha,
                     double prefactor) {
  const std::size_t n = src.x.size();
  const double* __restrict xs = src.x.data();
  const double* __restrict ys = src.y.data();
  const double* __restrict ws = src.w.data();
  double su = 0.0, sv = 0.0;
#pragma omp simd reduction(+ : su, sv)
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = xi - xs[j];
    const double dy = yi - ys[j];
    const double s = dx * dx + dy * dy + eps2;
    // s^{-(2+alpha)/2} = exp(-alpha/2 log s) / s
    const double f = ws[j] * std::exp(-half_alpha * std::log(s)) / s;
    su -= dy * f;
    sv += dx * f;
  }
  return {prefactor * su, prefactor * sv};
}

}  // namespace detail

/// Velocity induced by the particle field at each target:
///     u(x) = sum_j w_j K_eps(x - x_j).
/// The self term of a target sitting on a source vanishes because K_eps(0) = 0.
inline Points velocity_particles(std::span<const Vec2> targets, const ParticleField& field,
                                 const KernelParams& params) {
  if (field.positions.empty()) throw PreconditionError("velocity_particles: empty field");
  const detail::SourceArrays src(field);
  const double eps2 = field.eps * field.eps;
  const double half_alpha = 0.5 * params.alpha();
  const double prefactor = params.kernel_prefactor();
  Points out(targets.size());
  parallel_for(targets.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = detail::blob_sum(targets[i].x1, targets[i].x2, src, eps2, half_alpha, prefactor);
  });
  return out;
}

/// Velocity at x induced by a constant-theta0 patch, as a boundary integral.
///
/// With a counterclockwise boundary the divergence theorem turns the area
/// integral of K into
///
///     u(x) = theta0 c(alpha) \oint |x - y(s)|^{-alpha} dy(s),
///
/// integrated edge by edge. When x is a node the two adjacent edges are
/// integrated exactly as power laws; nearby edges use graded Gauss rules.
/// Requires alpha < 1 when x lies on the contour (the integrand is not
/// integrable at alpha = 1).
inline Vec2 velocity_contour_unchecked(const Vec2& x, const ContourPatch& patch,
                                       const KernelParams& params) {
  const Points& p = patch.nodes;
  const std::size_t n = p.size();
  Vec2 acc{0.0, 0.0};
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = p[j];
    const Vec2& b = p[i];
    const Vec2 ab = b - a;
    const double len = norm(ab);
    if (len == 0.0) continue;
    const double integral = segment_power_integral(x, a, b, params.alpha());
    acc += ab * (integral / len);
  }
  return acc * (patch.theta0 * params.riesz_constant());
}

inline void check_contour_for_velocity(const ContourPatch& patch) {
  if (patch.nodes.size() < kMinContourNodes)
    throw InvalidGeometryError("velocity_contour: need at least 16 nodes");
  if (has_self_intersection(patch.nodes))
    throw InvalidGeometryError("velocity_contour: contour self-intersects");
}

inline Vec2 velocity_contour(const Vec2& x, const ContourPatch& patch, const KernelParams& params) {
  check_contour_for_velocity(patch);
  return velocity_contour_unchecked(x, patch, params);
}

// Batch form; geometry is validated once.
inline Points velocity_contour(std::span<const Vec2> targets, const ContourPatch& patch,
                               const KernelParams& params) {
  check_contour_for_velocity(patch);
  Points out(targets.size());
  parallel_for(
      targets.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
          out[i] = velocity_contour_unchecked(targets[i], patch, params);
      },
      8);
  return out;
}

}  // namespace alphapatch
