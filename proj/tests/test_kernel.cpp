#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "alphapatch/kernel.hpp"

using namespace alphapatch;

namespace {

constexpr double kTwoPiInv = 1.0 / (2.0 * std::numbers::pi);

// Reference values from a 30-digit evaluation of the Gamma-function formula.
constexpr double kRiesz05 = 0.332967935501700261955760871273;
constexpr double kPrefactor05 = 0.166483967750850130977880435636;

ContourPatch circle_patch(std::size_t n, double radius = 1.0, Vec2 center = {0.0, 0.0}) {
  ContourPatch p;
  p.theta0 = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n;
    p.nodes.push_back(center + Vec2{radius * std::cos(th), radius * std::sin(th)});
  }
  p.target_spacing = perimeter(p.nodes) / n;
  return p;
}

ContourPatch trefoil_patch(std::size_t n) {
  ContourPatch p;
  p.theta0 = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n;
    const double r = 1.0 + 0.3 * std::cos(3.0 * th);
    p.nodes.push_back({r * std::cos(th), r * std::sin(th)});
  }
  p.target_spacing = perimeter(p.nodes) / n;
  return p;
}

bool inside_polygon(const Vec2& x, const Points& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.x2 > x.x2) != (b.x2 > x.x2) &&
        x.x1 < (b.x1 - a.x1) * (x.x2 - a.x2) / (b.x2 - a.x2) + a.x1)
      in = !in;
  }
  return in;
}

// Area-integral oracle for u(x) = theta0 \int_Omega K(x - y) dy, in polar
// coordinates about x. Along a ray y = x + rho e(phi) the kernel is
// -prefactor e^perp rho^{-1-alpha}, so the radial integral is exact and only
// the angle is integrated numerically. Independent of the boundary-integral form.
Vec2 area_oracle(const Vec2& x, const Points& poly, double theta0, const KernelParams& params,
                 int n_angles = 20000) {
  const double a = params.alpha();
  const bool in = inside_polygon(x, poly);
  Vec2 acc{0.0, 0.0};
  std::vector<double> hits;
  for (int k = 0; k < n_angles; ++k) {
    const double phi = 2.0 * std::numbers::pi * (k + 0.5) / n_angles;
    const Vec2 e{std::cos(phi), std::sin(phi)};
    hits.clear();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
      const Vec2 p = poly[j], d = poly[i] - poly[j];
      const double den = cross(e, d);
      if (den == 0.0) continue;
      const Vec2 w = p - x;
      const double rho = cross(w, d) / den;
      const double s = cross(w, e) / den;
      if (rho > 0.0 && s >= 0.0 && s < 1.0) hits.push_back(rho);
    }
    std::sort(hits.begin(), hits.end());
    double radial = 0.0;
    std::size_t i = 0;
    if (in) {
      radial += std::pow(hits[0], 1.0 - a);
      i = 1;
    }
    for (; i + 1 < hits.size(); i += 2) radial += std::pow(hits[i + 1], 1.0 - a) - std::pow(hits[i], 1.0 - a);
    acc += perp(e) * radial;
  }
  return acc * (-theta0 * params.kernel_prefactor() / (1.0 - a) * 2.0 * std::numbers::pi / n_angles);
}

}  // namespace

TEST(GammaFn, ClassicalValues) {
  EXPECT_NEAR(gamma_fn(1.0), 1.0, 1e-15);
  EXPECT_NEAR(gamma_fn(0.5), std::sqrt(std::numbers::pi), 1e-14);
  EXPECT_NEAR(gamma_fn(2.5), 1.32934038817913702047, 1e-13);
}

TEST(GammaFn, MatchesLibmOverRange) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(1e-3, 30.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(gen);
    const double ref = std::tgamma(x);
    EXPECT_LE(std::abs(gamma_fn(x) - ref) / ref, 1e-12) << "x = " << x;
  }
}

TEST(GammaFn, RejectsNonPositive) {
  EXPECT_THROW(gamma_fn(0.0), DomainError);
  EXPECT_THROW(gamma_fn(-1.5), DomainError);
}

TEST(RieszConstant, ReferenceValues) {
  EXPECT_NEAR(riesz_constant(1.0), kTwoPiInv, 1e-12 * kTwoPiInv);
  EXPECT_NEAR(riesz_constant(0.5), kRiesz05, 1e-10);
  EXPECT_NEAR(KernelParams(0.5).kernel_prefactor(), kPrefactor05, 1e-10);
}

TEST(RieszConstant, EulerLimit) {
  const double a = 1e-6;
  EXPECT_NEAR(a * riesz_constant(a) / kTwoPiInv, 1.0, 1e-4);
  EXPECT_NEAR(KernelParams(a).kernel_prefactor() / kTwoPiInv, 1.0, 1e-4);
}

TEST(RieszConstant, DomainAndPositivity) {
  EXPECT_THROW(riesz_constant(0.0), DomainError);
  EXPECT_THROW(riesz_constant(2.0), DomainError);
  for (double a = 0.01; a < 2.0; a += 0.01) EXPECT_GT(riesz_constant(a), 0.0);
}

TEST(KernelParams, AlphaRange) {
  EXPECT_THROW(KernelParams(0.0), DomainError);
  EXPECT_THROW(KernelParams(1.5), DomainError);
  EXPECT_NO_THROW(KernelParams(1.0));
  EXPECT_TRUE(KernelParams(1.0).experimental());
  EXPECT_FALSE(KernelParams(0.5).experimental());
}

TEST(KernelEval, ClosedFormPoint) {
  const Vec2 k = kernel_eval({1.0, 0.0}, KernelParams(0.5));
  EXPECT_EQ(k.x1, 0.0);
  EXPECT_NEAR(k.x2, kPrefactor05, 1e-12);
}

TEST(KernelEval, SingularAtOrigin) {
  EXPECT_THROW(kernel_eval({0.0, 0.0}, KernelParams(0.5)), SingularityError);
}

TEST(KernelEval, OddOrthogonalAndScaling) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0), lam(0.1, 10.0), al(0.05, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const KernelParams params(al(gen));
    const Vec2 z{u(gen), u(gen)};
    const Vec2 k = kernel_eval(z, params);
    const Vec2 km = kernel_eval(-z, params);
    ASSERT_EQ(km.x1, -k.x1);
    ASSERT_EQ(km.x2, -k.x2);
    ASSERT_LE(std::abs(dot(z, k)), 4e-16 * norm(z) * norm(k));
    ASSERT_NEAR(norm(k), params.kernel_prefactor() / std::pow(norm(z), 1.0 + params.alpha()),
                1e-12 * norm(k));
    const double l = lam(gen);
    const double scaled = norm(kernel_eval(z * l, params));
    ASSERT_NEAR(scaled, std::pow(l, -(1.0 + params.alpha())) * norm(k), 1e-12 * scaled);
  }
}

TEST(KernelEvalBlob, SmoothAndConsistent) {
  const KernelParams params(0.5);
  const Vec2 zero = kernel_eval_blob({0.0, 0.0}, 0.1, params);
  EXPECT_EQ(zero.x1, 0.0);
  EXPECT_EQ(zero.x2, 0.0);

  const double eps = 0.01;
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi), u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double th = ang(gen);
    const Vec2 z{100.0 * eps * std::cos(th), 100.0 * eps * std::sin(th)};
    const Vec2 kb = kernel_eval_blob(z, eps, params);
    const Vec2 k = kernel_eval(z, params);
    EXPECT_LE(norm(kb - k) / norm(k), 1e-3);
    const Vec2 w{u(gen), u(gen)};
    const Vec2 a = kernel_eval_blob(w, eps, params), b = kernel_eval_blob(-w, eps, params);
    EXPECT_EQ(a.x1, -b.x1);
    EXPECT_EQ(a.x2, -b.x2);
  }
}

TEST(VelocityParticles, SingleParticleClosedForm) {
  const KernelParams params(0.5);
  ParticleField f;
  f.positions = {{0.0, 0.0}};
  f.weights = {2.0};
  f.eps = 1e-9;
  const double r = 1.7;
  const Points u = velocity_particles(std::vector<Vec2>{{r, 0.0}}, f, params);
  EXPECT_NEAR(u[0].x1, 0.0, 1e-15);
  EXPECT_NEAR(u[0].x2, 2.0 * params.kernel_prefactor() / std::pow(r, 1.5), 1e-12);
}

TEST(VelocityParticles, PairIsPerpendicularAndOpposite) {
  for (double alpha : {0.2, 0.5, 0.8}) {
    const KernelParams params(alpha);
    const double d = 0.7, w = 1.3;
    ParticleField f;
    f.positions = {{-0.5 * d, 0.0}, {0.5 * d, 0.0}};
    f.weights = {w, w};
    f.eps = 1e-9;
    const Points u = velocity_particles(f.positions, f, params);
    const double speed = w * params.kernel_prefactor() / std::pow(d, 1.0 + alpha);
    EXPECT_NEAR(u[1].x2, speed, 1e-12 * speed);
    EXPECT_NEAR(u[0].x2, -speed, 1e-12 * speed);
    EXPECT_EQ(u[0].x1, 0.0);
    EXPECT_EQ(u[1].x1, 0.0);
  }
}

TEST(VelocityParticles, SymmetricRingCenterIsAtRest) {
  ParticleField f;
  f.positions = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  f.weights = {1, 1, 1, 1};
  f.eps = 0.05;
  const Points u = velocity_particles(std::vector<Vec2>{{0.0, 0.0}}, f, KernelParams(0.5));
  EXPECT_NEAR(u[0].x1, 0.0, 1e-15);
  EXPECT_NEAR(u[0].x2, 0.0, 1e-15);
}

TEST(VelocityParticles, ResultIndependentOfThreadCount) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParticleField f;
  for (int i = 0; i < 700; ++i) {
    f.positions.push_back({u(gen), u(gen)});
    f.weights.push_back(0.01 + 0.01 * (u(gen) + 1.0));
  }
  f.eps = 0.02;
  const KernelParams params(0.5);
  set_thread_count(1);
  const Points a = velocity_particles(f.positions, f, params);
  set_thread_count(4);
  const Points b = velocity_particles(f.positions, f, params);
  set_thread_count(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].x1, b[i].x1);
    ASSERT_EQ(a[i].x2, b[i].x2);
  }
}

TEST(VelocityParticles, MatchesPairwiseKernelSum) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParticleField f;
  for (int i = 0; i < 50; ++i) {
    f.positions.push_back({u(gen), u(gen)});
    f.weights.push_back(0.5 + 0.5 * u(gen));
  }
  f.eps = 0.03;
  const KernelParams params(0.7);
  const Points v = velocity_particles(f.positions, f, params);
  for (std::size_t i = 0; i < f.size(); ++i) {
    Vec2 ref{0.0, 0.0};
    for (std::size_t j = 0; j < f.size(); ++j)
      ref += kernel_eval_blob(f.positions[i] - f.positions[j], f.eps, params) * f.weights[j];
    EXPECT_NEAR(v[i].x1, ref.x1, 1e-12 * norm(ref));
    EXPECT_NEAR(v[i].x2, ref.x2, 1e-12 * norm(ref));
  }
}

TEST(VelocityParticles, DivergenceVanishesAtSecondOrder) {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParticleField f;
  for (int i = 0; i < 20; ++i) {
    f.positions.push_back({u(gen), u(gen)});
    f.weights.push_back(1.0);
  }
  f.eps = 0.2;
  const KernelParams params(0.5);
  auto div = [&](const Vec2& x, double h) {
    const std::vector<Vec2> pts = {x + Vec2{h, 0}, x - Vec2{h, 0}, x + Vec2{0, h}, x - Vec2{0, h}};
    const Points v = velocity_particles(pts, f, params);
    return (v[0].x1 - v[1].x1) / (2 * h) + (v[2].x2 - v[3].x2) / (2 * h);
  };
  for (int k = 0; k < 10; ++k) {
    const Vec2 x{1.5 * u(gen), 1.5 * u(gen)};
    const double d1 = std::abs(div(x, 0.04));
    const double d2 = std::abs(div(x, 0.02));
    if (d1 < 1e-12) continue;  // already at roundoff
    EXPECT_NEAR(d1 / d2, 4.0, 0.6) << "x = (" << x.x1 << ", " << x.x2 << ")";
  }
}

TEST(SegmentPowerIntegral, EndpointAndFarField) {
  // x at the endpoint: exactly L^{1-p}/(1-p)
  const double L = 0.3, p = 0.5;
  EXPECT_NEAR(segment_power_integral({0, 0}, {0, 0}, {L, 0}, p), std::pow(L, 1 - p) / (1 - p), 1e-14);
  // x on the interior of the segment
  EXPECT_NEAR(segment_power_integral({0.1, 0}, {0, 0}, {L, 0}, p),
              (std::pow(0.1, 1 - p) + std::pow(0.2, 1 - p)) / (1 - p), 1e-13);
  // near-singular: compare with dense midpoint sum
  const Vec2 x{0.13, 1e-4};
  double ref = 0.0;
  const int n = 2000000;
  for (int i = 0; i < n; ++i) {
    const double s = L * (i + 0.5) / n;
    ref += std::pow((s - x.x1) * (s - x.x1) + x.x2 * x.x2, -0.5 * p);
  }
  ref *= L / n;
  EXPECT_NEAR(segment_power_integral(x, {0, 0}, {L, 0}, p), ref, 1e-6 * ref);
}

TEST(VelocityContour, CenterOfCircleIsAtRest) {
  const ContourPatch c = circle_patch(128);
  const Vec2 u = velocity_contour({0.0, 0.0}, c, KernelParams(0.5));
  EXPECT_NEAR(u.x1, 0.0, 1e-14);
  EXPECT_NEAR(u.x2, 0.0, 1e-14);
}

TEST(VelocityContour, BoundaryMatchesAreaQuadrature) {
  // Exact disk: distance to the boundary along a ray from the boundary point
  // (1,0) is rho(phi) = -2 cos(phi) for phi in (pi/2, 3pi/2).
  for (double alpha : {0.2, 0.5, 0.8}) {
    const KernelParams params(alpha);
    const ContourPatch c = circle_patch(2048);
    const Vec2 u = velocity_contour({1.0, 0.0}, c, params);
    Vec2 ref{0.0, 0.0};
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      const double phi = 0.5 * std::numbers::pi + std::numbers::pi * (k + 0.5) / n;
      const double rho = -2.0 * std::cos(phi);
      ref += perp(Vec2{std::cos(phi), std::sin(phi)}) * std::pow(rho, 1.0 - alpha);
    }
    ref = ref * (-params.kernel_prefactor() / (1.0 - alpha) * std::numbers::pi / n);
    EXPECT_NEAR(u.x1, 0.0, 1e-6 * norm(ref)) << "alpha " << alpha;  // purely azimuthal
    EXPECT_NEAR(norm(u) / norm(ref), 1.0, 1e-3) << "alpha " << alpha;
    EXPECT_GT(u.x2, 0.0);  // counterclockwise rotation for positive theta
  }
}

TEST(VelocityContour, FarFieldIsPointSource) {
  const KernelParams params(0.5);
  const ContourPatch c = circle_patch(512);
  const double area = signed_area(c.nodes);
  ParticleField point;
  point.positions = {{0.0, 0.0}};
  point.weights = {c.theta0 * area};
  point.eps = 1e-12;
  for (double th : {0.0, 0.7, 2.0, 4.1}) {
    const Vec2 x{20.0 * std::cos(th), 20.0 * std::sin(th)};
    const Vec2 u = velocity_contour(x, c, params);
    const Vec2 v = velocity_particles(std::vector<Vec2>{x}, point, params)[0];
    EXPECT_LE(norm(u - v) / norm(v), 1e-2);
  }
}

TEST(VelocityContour, ExteriorPointsMatchAreaQuadrature) {
  const KernelParams params(0.5);
  const ContourPatch c = trefoil_patch(512);
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi), rad(1.35, 3.0);
  for (int k = 0; k < 20; ++k) {
    const double th = ang(gen), r = rad(gen);
    const Vec2 x{r * std::cos(th), r * std::sin(th)};
    const Vec2 u = velocity_contour(x, c, params);
    const Vec2 ref = area_oracle(x, c.nodes, c.theta0, params);
    EXPECT_LE(norm(u - ref) / norm(ref), 1e-3) << "point " << k;
  }
}

TEST(VelocityContour, InteriorPointMatchesAreaQuadrature) {
  const KernelParams params(0.3);
  const ContourPatch c = trefoil_patch(512);
  const Vec2 x{0.4, 0.2};
  const Vec2 u = velocity_contour(x, c, params);
  const Vec2 ref = area_oracle(x, c.nodes, c.theta0, params);
  EXPECT_LE(norm(u - ref) / norm(ref), 1e-3);
}

TEST(VelocityContour, RejectsDegenerateGeometry) {
  const KernelParams params(0.5);
  EXPECT_THROW(velocity_contour({2.0, 0.0}, circle_patch(8), params), InvalidGeometryError);
  ContourPatch bowtie = circle_patch(32);
  std::swap(bowtie.nodes[3], bowtie.nodes[20]);
  EXPECT_THROW(velocity_contour({2.0, 0.0}, bowtie, params), InvalidGeometryError);
}
