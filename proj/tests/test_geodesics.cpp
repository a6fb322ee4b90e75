#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include "lfgeom/connection.hpp"
#include "lfgeom/errors.hpp"
#include "lfgeom/geodesics.hpp"
#include "support.hpp"

using namespace lfgeom;
using namespace testsupport;

TEST(Geodesics, StraightLines) {
  for (const char* name : {"minkowski", "flat_finsler"}) {
    auto m = zoo(name);
    GeodesicPath p = integrate_geodesic(m, vec({0, 0}), vec({1, 0}), 0, 1);
    for (std::size_t k = 0; k < p.t.size(); ++k) EXPECT_LT((p.x[k] - vec({p.t[k], 0})).norm(), 1e-14);
    EXPECT_LT((exp_map(m, vec({0.5, -1}), vec({1, 0.3})) - vec({1.5, -0.7})).norm(), 1e-13);
  }
  BvpSolution b = solve_bvp(zoo("minkowski"), vec({0, 0}), vec({2, 1}));
  EXPECT_LT((b.velocity - vec({2, 1})).norm(), 1e-12);
}

TEST(Geodesics, Conservation) {
  auto m = zoo("de_sitter", 3);
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    Sample s = timelike_sample(*m, rng, 0.3);
    GeodesicPath p = integrate_geodesic(m, s.x, 0.2 * s.v.normalized(), 0, 1);
    const double L0 = m->lagrangian(p.x[0], p.v[0]);
    for (std::size_t j = 0; j < p.t.size(); ++j) EXPECT_NEAR(m->lagrangian(p.x[j], p.v[j]), L0, 1e-8 * std::abs(L0));
    // Knot states satisfy the geodesic equation.
    for (std::size_t j = 0; j < p.t.size(); ++j)
      EXPECT_LT((p.a[j] + spray(*m, p.x[j], p.v[j])).norm(), 1e-9);
  }
}

TEST(Geodesics, SemigroupAndReparametrization) {
  for (const std::string& name : zoo_names()) {
    auto m = zoo(name);
    Rng rng(4);
    Sample s = timelike_sample(*m, rng, 0.3);
    const Vec v = 0.3 * s.v;
    GeodesicPath half = integrate_geodesic(m, s.x, 0.5 * v, 0, 1);
    const Vec full = exp_map(m, s.x, v);
    EXPECT_LT((exp_map(m, half.x.back(), half.v.back()) - full).cwiseAbs().maxCoeff(), 1e-8) << name;
    GeodesicPath slow = integrate_geodesic(m, s.x, v / 3.0, 0, 3);
    EXPECT_LT((slow.x.back() - full).cwiseAbs().maxCoeff(), 1e-8) << name;
  }
}

// Spatial rotations about the origin fix x = (t, 0, 0) and act as isometries of the static patch.
TEST(Geodesics, DeSitterRotationEquivariance) {
  auto m = zoo("de_sitter", 3);
  const Vec x = vec({0.1, 0, 0});
  Rng rng(5);
  for (int k = 0; k < 5; ++k) {
    const Vec v = 0.3 * sample_future_timelike(*m, x, rng);
    const double a = rng.uniform(0, 6.28);
    Mat Rm = Mat::Identity(3, 3);
    Rm.block(1, 1, 2, 2) = Eigen::Rotation2Dd(a).toRotationMatrix();
    EXPECT_LT((exp_map(m, x, Rm * v) - Rm * exp_map(m, x, v)).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Geodesics, BvpInversion) {
  for (const std::string& name : zoo_names()) {
    auto m = zoo(name);
    Rng rng(6);
    int done = 0;
    for (int attempt = 0; done < 30 && attempt < 300; ++attempt) {
      const Vec x = sample_point(m->chart(), rng, 0.5);
      Vec v = sample_cone_vector(*m, x, rng);
      v *= 0.3 * m->chart().half_width().minCoeff() / v.norm();
      Vec y;
      try {
        y = exp_map(m, x, v);
      } catch (const Error&) {
        continue;
      }
      BvpSolution b = solve_bvp(m, x, y);
      EXPECT_LT((b.velocity - v).cwiseAbs().maxCoeff(), 1e-7) << name;
      EXPECT_LT((exp_map(m, x, b.velocity) - y).cwiseAbs().maxCoeff(), 1e-9) << name;
      ++done;
    }
    EXPECT_EQ(done, 30) << name;
  }
}

TEST(Geodesics, ParallelTransport) {
  auto mk = zoo("minkowski");
  GeodesicPath p = integrate_geodesic(mk, vec({0, 0}), vec({1, 0.5}), 0, 1);
  TransportedField tf = parallel_transport(p, vec({2, 1}), ReferencePolicy::kTangent);
  for (const Vec& V : tf.V) EXPECT_LT((V - vec({2, 1})).norm(), 1e-14);

  auto ds = zoo("de_sitter", 3);
  Rng rng(7);
  Sample s = timelike_sample(*ds, rng, 0.3);
  GeodesicPath q = integrate_geodesic(ds, s.x, 0.2 * s.v.normalized(), 0, 1);
  const Vec V0 = sample_gaussian(3, rng), W0 = sample_gaussian(3, rng);
  TransportedField a = parallel_transport(q, V0, ReferencePolicy::kTangent);
  TransportedField b = parallel_transport(q, W0, ReferencePolicy::kTangent);
  const double g0 = inner(*ds, q.x[0], q.v[0], V0, W0);
  for (std::size_t k = 0; k < a.t.size(); ++k) EXPECT_NEAR(inner(*ds, q.x[k], q.v[k], a.V[k], b.V[k]), g0, 1e-6);
}

// L(V) is constant for a parallel field on a Berwald model, also along a non-geodesic curve.
TEST(Geodesics, ParallelPreservesLOnBerwaldCurve) {
  auto m = zoo("product_hyperbolic");
  C1Curve c{0, 1, [](double t) { return vec({0.2 * t, 0.3 * std::sin(t), 0.2 * t * t}); },
            [](double t) { return vec({0.2, 0.3 * std::cos(t), 0.4 * t}); }};
  const Vec V0 = vec({1, 0.2, -0.1});
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(i / 10.0);
  TransportedField tf = parallel_transport(m, c, V0, ReferencePolicy::kFixed, ts, vec({1, 0, 0}));
  const double L0 = m->lagrangian(c.position(0), V0);
  for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_NEAR(m->lagrangian(tf.x[k], tf.V[k]), L0, 1e-7);
}

TEST(Geodesics, TimeSeparation) {
  auto m = zoo("minkowski");
  EXPECT_NEAR(time_separation(m, vec({0, 0}), vec({2, 1})), std::sqrt(3.0), 1e-9);
  EXPECT_EQ(time_separation(m, vec({0, 0}), vec({1, 2})), 0.0);
  EXPECT_EQ(time_separation(m, vec({2, 1}), vec({0, 0})), 0.0);

  auto ds = zoo("de_sitter", 3);
  const Vec x = vec({-0.3, 0.1, 0}), y = vec({0.3, 0.15, 0.05});
  TimeSeparation t = time_separation_full(ds, x, y);
  EXPECT_GT(t.tau, 0);
  EXPECT_TRUE(classify(*ds, x, t.velocity).future_timelike());
  EXPECT_EQ(time_separation(ds, y, x), 0.0);
  // Additivity along the maximizer, and the reverse triangle inequality off it.
  BvpSolution b = solve_bvp(ds, x, y);
  const Vec z = b.path.position(0.4);
  EXPECT_NEAR(time_separation(ds, x, z) + time_separation(ds, z, y), t.tau, 1e-7);
  const Vec z2 = z + vec({0, 0.03, -0.02});
  EXPECT_LE(time_separation(ds, x, z2) + time_separation(ds, z2, y), t.tau + 1e-7);
}

// τ as a Gauss-Legendre sum against a dense trapezoid of F along the re-integrated path.
TEST(Geodesics, TimeSeparationQuadrature) {
  auto m = zoo("perturbed_finsler");
  const Vec x = vec({-0.3, 0.1}), y = vec({0.4, 0.2});
  TimeSeparation t = time_separation_full(m, x, y);
  GeodesicOptions o;
  const int N = 4000;
  for (int i = 0; i <= N; ++i) o.forced.push_back(static_cast<double>(i) / N);
  o.forced_only = true;
  GeodesicPath p = integrate_geodesic(m, x, t.velocity, 0, 1, o);
  std::vector<double> F;
  for (std::size_t k = 0; k < p.t.size(); ++k) F.push_back(std::sqrt(-2 * m->lagrangian(p.x[k], p.v[k])));
  double simpson = 0;
  for (int i = 0; i < N; i += 2) simpson += (F[i] + 4 * F[i + 1] + F[i + 2]) / (3.0 * N);
  EXPECT_NEAR(t.tau, simpson, 1e-10);
}

TEST(Geodesics, Errors) {
  auto m = zoo("flat_finsler");
  try {
    integrate_geodesic(m, vec({0, 0}), vec({10, 0}), 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLeftChart);
  }
  try {
    integrate_geodesic(m, vec({0, 0}), vec({1, 1}), 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutsideValidityCone);
  }
  GeodesicPath c = integrate_geodesic(m, vec({0.1, 0.2}), vec({0, 0}), 0, 1);
  EXPECT_TRUE(c.is_constant());
  EXPECT_EQ(c.position(0.7), vec({0.1, 0.2}));
}
