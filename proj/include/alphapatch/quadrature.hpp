#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "alphapatch/vec2.hpp"

namespace alphapatch {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Cached rules for the orders used in this library.
template <int N>
const GaussRule& gauss_legendre() {
  static const GaussRule rule = make_gauss_legendre(N);
  return rule;
}

template <int N, typename F>
double integrate_gl(F&& f, double a, double b) {
  const GaussRule& r = gauss_legendre<N>();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

namespace detail {

// G(u) = int_0^u (v^2 + h^2)^(-p/2) dv for u >= 0, p in (0, 2).
// Geometric grading away from v = 0 keeps every piece at least one piece-length
// from the complex singularities v = +-ih.
inline double graded_power_integral(double u, double h, double p) {
  if (u <= 0.0) return 0.0;
  if (h <= 1e-13 * u) {
    // x on the segment's line: the integrand is exactly v^-p.
    return std::pow(u, 1.0 - p) / (1.0 - p);
  }
  auto f = [h2 = h * h, p](double v) { return std::pow(v * v + h2, -0.5 * p); };
  double lo = 0.0;
  double hi = std::min(h, u);
  double sum = 0.0;
  while (true) {
    sum += integrate_gl<10>(f, lo, hi);
    if (hi >= u) break;
    lo = hi;
    hi = std::min(2.0 * hi, u);
  }
  return sum;
}

}  // namespace detail

/// Integral of |x - y|^(-p) over the straight segment y in [a, b], by arc length.
///
/// Accurate for x on, near, or far from the segment. p must lie in (0, 2);
/// when x lies on the segment itself p < 1 is required for a finite value.
inline double segment_power_integral(const Vec2& x, const Vec2& a, const Vec2& b, double p) {
  const Vec2 ab = b - a;
  const double len = norm(ab);
  if (len == 0.0) return 0.0;
  const Vec2 t = ab / len;
  const Vec2 d = x - a;
  const double s0 = dot(d, t);
  const double h = std::abs(cross(t, d));

  const double s_clamped = std::clamp(s0, 0.0, len);
  const double dist = std::hypot(s0 - s_clamped, h);
  if (dist > 2.0 * len) {
    auto f = [&](double s) {
      const Vec2 r = d - t * s;
      return std::pow(norm2(r), -0.5 * p);
    };
    return dist > 8.0 * len ? integrate_gl<4>(f, 0.0, len) : integrate_gl<6>(f, 0.0, len);
  }
  // int_{-s0}^{len - s0} (v^2 + h^2)^(-p/2) dv, split at v = 0.
  const double lo = -s0, hi = len - s0;
  auto G = [&](double u) {
    return u >= 0.0 ? detail::graded_power_integral(u, h, p)
                    : -detail::graded_power_integral(-u, h, p);
  };
  return G(hi) - G(lo);
}

}  // namespace alphapatch
