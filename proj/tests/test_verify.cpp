#include <gtest/gtest.h>

#include "lfgeom/curvature.hpp"
#include "lfgeom/errors.hpp"
#include "lfgeom/verify.hpp"
#include "support.hpp"

using namespace lfgeom;
using namespace testsupport;

namespace {

GeodesicPath line(const ModelPtr& m, const Vec& x, const Vec& v) {
  GeodesicOptions o;
  for (int i = 0; i <= 32; ++i) o.forced.push_back(i / 32.0);
  return integrate_geodesic(m, x, v, 0, 1, o);
}

}  // namespace

TEST(Verify, MinkowskiExplicitConcavity) {
  auto m = zoo("minkowski");
  GeodesicPath eta = line(m, vec({0, 0}), vec({0, 0.5}));
  GeodesicPath xi = constant_path(m, vec({2, 0}));
  ConcavityReport r = check_concavity_pair(eta, xi);
  ASSERT_EQ(r.values.size(), 33u);
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const double t = r.grid[i];
    EXPECT_NEAR(r.values[i], std::sqrt(4 - 0.25 * t * t), 1e-9);
  }
  EXPECT_TRUE(r.pass);
  ConcavityReport c = check_concavity_pair(constant_path(m, vec({0, 0})), constant_path(m, vec({1.5, 0.2})));
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.worst_deficit, 0.0, 1e-12);
}

TEST(Verify, EndpointCondition) {
  auto m = zoo("minkowski");
  try {
    check_concavity_pair(constant_path(m, vec({0, 0})), constant_path(m, vec({0.5, 1})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEndpointConditionViolated);
  }
  // Equal endpoints are admissible.
  GeodesicPath eta = line(m, vec({0, 0}), vec({1, 0}));
  EXPECT_TRUE(check_concavity_pair(eta, eta).pass);
  EXPECT_THROW(check_concavity_pair(eta, constant_path(m, vec({2, 0})), 33, true), Error);
}

TEST(Verify, SphereConcavityWitness) {
  CheckReport r = scan_concavity(zoo("product_sphere"), 12, 33, false, 42);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(*r.worst_deficit, -1e-5);
  ASSERT_TRUE(r.witness.contains("eta"));
  // Re-running the witnessed pair reproduces the failure.
  auto m = zoo("product_sphere");
  GeodesicPath eta = line(m, vec_from_json(r.witness["eta"]["x"]), vec_from_json(r.witness["eta"]["v"]));
  GeodesicPath xi = line(m, vec_from_json(r.witness["xi"]["x"]), vec_from_json(r.witness["xi"]["v"]));
  ConcavityReport again = check_concavity_pair(eta, xi);
  EXPECT_FALSE(again.pass);
  EXPECT_NEAR(again.worst_deficit, *r.worst_deficit, 1e-7);
}

TEST(Verify, VariationConcavity) {
  auto mk = zoo("minkowski");
  VariationReport a = check_variation_concavity(mk, [](double s) { return vec({s, 0}); },
                                                [](double s) { return vec({s + 2, 0}); });
  EXPECT_TRUE(a.pass);
  EXPECT_TRUE(a.variation_timelike);
  for (const char* name : {"product_hyperbolic", "de_sitter"}) {
    auto m = zoo(name);
    Rng rng(14);
    const int cases = std::string(name) == "de_sitter" ? 3 : 10;
    for (int c = 0; c < cases; ++c) {
      const Vec a0 = sample_point(m->chart(), rng, 0.2);
      const Vec ua = 0.15 * sample_future_timelike(*m, a0, rng, 0.5);
      const Vec up = 0.15 * sample_future_timelike(*m, a0, rng, 0.5);
      const Vec b0 = exp_map(m, a0, 3.0 * up);
      GeodesicPath alpha = integrate_geodesic(m, a0, ua, 0, 1);
      GeodesicPath beta = integrate_geodesic(m, b0, ua, 0, 1);
      VariationReport r = check_variation_concavity(
          m, [&](double s) { return alpha.position(s); }, [&](double s) { return beta.position(s); }, 17, 5);
      EXPECT_TRUE(r.pass) << name << " deficit " << r.worst_deficit;
      EXPECT_TRUE(r.variation_timelike);
    }
  }
}

// Brute-force membership from the explicit Minkowski time separation.
TEST(Verify, MinkowskiMembership) {
  auto m = zoo("minkowski");
  GeodesicPath gamma = line(m, vec({0, -0.5}), vec({0.2, 1.0}));
  Rng rng(15);
  for (int k = 0; k < 10; ++k) {
    const Vec z = vec({rng.uniform(0.5, 1.5), rng.uniform(-0.8, 0.8)});
    double best = 0;
    for (int i = 0; i <= 20000; ++i) {
      const double t = i / 20000.0;
      const Vec d = z - gamma.position(t);
      if (d(0) > std::abs(d(1))) best = std::max(best, std::sqrt(d(0) * d(0) - d(1) * d(1)));
    }
    EXPECT_NEAR(capsule_membership(gamma, z), best, 1e-8);
  }
}

TEST(Verify, Capsules) {
  auto mk = zoo("minkowski");
  CapsuleSpec spec;
  spec.gamma = line(mk, vec({-0.5, -0.5}), vec({0.2, 1.0}));
  spec.r = 0.5;
  spec.member_pairs = 16;
  EXPECT_TRUE(check_capsule(mk, spec, 1e-6 * 1.5, 3).pass);
  spec.gamma = constant_path(mk, vec({-0.5, 0}));
  EXPECT_TRUE(check_capsule(mk, spec, 1e-6 * 1.5, 3).pass);

  CheckReport bad = scan_capsules(zoo("product_sphere"), CapsuleSide::kFuture, 16, 17, 0.3, 42);
  EXPECT_FALSE(bad.pass);
  EXPECT_LT(*bad.worst_deficit, -1e-4);
  EXPECT_TRUE(bad.witness.contains("z1"));
}

// Past capsules of a model are future capsules of its reverse.
TEST(Verify, PastCapsuleIsReverseFuture) {
  auto m = zoo("product_hyperbolic");
  auto rev = reverse_model(m);
  GeodesicPath g = line(m, vec({0.1, -0.2, 0.1}), vec({0.1, 0.5, 0.2}));
  GeodesicPath gr = line(rev, g.x.back(), -g.v.back());
  CapsuleSpec past;
  past.gamma = g;
  past.side = CapsuleSide::kPast;
  past.member_pairs = 6;
  CapsuleSpec fut = past;
  fut.gamma = gr;
  fut.side = CapsuleSide::kFuture;
  CheckReport a = check_capsule(m, past, 1.3e-6, 9), b = check_capsule(rev, fut, 1.3e-6, 9);
  EXPECT_EQ(a.pass, b.pass);
  EXPECT_NEAR(*a.worst_deficit, *b.worst_deficit, 1e-7);
}

TEST(Verify, ParallelConstancy) {
  struct Case {
    const char* name;
    double tol;
  };
  for (Case c : {Case{"minkowski", 1e-14}, Case{"flat_finsler", 1e-7}, Case{"de_sitter", 1e-6}}) {
    auto m = zoo(c.name);
    Rng rng(16);
    for (int k = 0; k < 5; ++k) {
      Sample s = timelike_sample(*m, rng, 0.3);
      GeodesicPath p = integrate_geodesic(m, s.x, 0.3 * sample_cone_vector(*m, s.x, rng), 0, 1);
      ParallelReport r = check_parallel_L_constancy(p, s.v, c.tol);
      EXPECT_TRUE(r.pass) << c.name << " " << r.max_deviation;
    }
  }
}

// F(J(t)) is concave for timelike Jacobi fields on a model with K >= 0.
TEST(Verify, JacobiLengthConcaveOnDeSitter) {
  auto m = zoo("de_sitter", 3);
  Rng rng(17);
  int checked = 0;
  for (int k = 0; k < 40 && checked < 20; ++k) {
    Sample s = timelike_sample(*m, rng, 0.3);
    const Vec w = 0.3 * sample_future_timelike(*m, s.x, rng, 0.6);
    GeodesicOptions o;
    for (int i = 0; i <= 32; ++i) o.forced.push_back(i / 32.0);
    o.forced_only = true;
    GeodesicPath eta = integrate_geodesic(m, s.x, w, 0, 1, o);
    JacobiSolution js = jacobi_propagate(eta, s.v, 0.3 * sample_gaussian(3, rng));
    std::vector<double> F;
    bool timelike = true;
    for (std::size_t i = 0; i < js.t.size(); ++i) {
      if (classify(*m, js.along.x[i], js.J[i]).kind != CausalKind::kTimelike) timelike = false;
      else F.push_back(norm_F(*m, js.along.x[i], js.J[i]));
    }
    if (!timelike) continue;
    ++checked;
    for (std::size_t i = 1; i + 1 < F.size(); ++i) EXPECT_GE(F[i] - 0.5 * (F[i - 1] + F[i + 1]), -1e-5);
  }
  EXPECT_GE(checked, 10);
}

TEST(Verify, TheoremMatrixSmallBudget) {
  TheoremBudget b;
  b.flag_samples = 50;
  b.concavity_pairs = 4;
  b.capsule_pairs = 4;
  TheoremReport t = verify_theorem(zoo("minkowski"), b, 1);
  EXPECT_TRUE(t.agree);
  EXPECT_TRUE(t.berwald);
  for (const CheckReport& c : t.conditions) EXPECT_TRUE(c.pass) << c.check;
  TheoremReport p = verify_theorem(zoo("perturbed_finsler"), b, 1);
  EXPECT_FALSE(p.berwald);
  EXPECT_FALSE(p.warnings.empty());
}

TEST(Verify, Deterministic) {
  auto m = zoo("de_sitter");
  EXPECT_EQ(scan_concavity(m, 3, 17, true, 5).to_json().dump(), scan_concavity(m, 3, 17, true, 5).to_json().dump());
  EXPECT_EQ(scan_parallel(m, 5, 1e-6, 5).to_json().dump(), scan_parallel(m, 5, 1e-6, 5).to_json().dump());
}
