#include <gtest/gtest.h>

#include "lfgeom/errors.hpp"
#include "support.hpp"

using namespace lfgeom;
using namespace testsupport;

TEST(Fundamental, MinkowskiMetric) {
  auto m = zoo("minkowski");
  MetricAtV g = metric_tensor(*m, vec({0, 0}), vec({0.3, 2}));
  EXPECT_EQ(g.g(0, 0), -1.0);
  EXPECT_EQ(g.g(1, 1), 1.0);
  EXPECT_EQ(g.g(0, 1), 0.0);
  EXPECT_EQ(inner(*m, vec({0, 0}), vec({1, 0}), vec({1, 0}), vec({0, 1})), 0.0);
}

TEST(Fundamental, FlatFinslerMetricMatchesStencil) {
  auto m = zoo("flat_finsler", 2, 0.01);
  const Vec x = vec({0, 0}), v = vec({1, 0.1});
  const Mat H = fd_hessian_v(*m, x, v);
  MetricAtV g = metric_tensor(*m, x, v);
  EXPECT_LT((g.g - H).cwiseAbs().maxCoeff(), 1e-5);
}

// g_v(v,v) = 2L(v) and g_cv = g_v.
TEST(Fundamental, EulerIdentities) {
  for (const std::string& name : zoo_names()) {
    auto m = zoo(name);
    Rng rng(21);
    for (int k = 0; k < 1000; ++k) {
      const Vec x = sample_point(m->chart(), rng);
      const Vec v = sample_cone_vector(*m, x, rng);
      const Mat g = metric_tensor(*m, x, v).g;
      const double L = eval_L(*m, x, v);
      const double scale = g.cwiseAbs().maxCoeff() * v.squaredNorm();
      EXPECT_NEAR(v.dot(g * v), 2 * L, 1e-8 * scale) << name;
      const double c = rng.uniform(0.2, 5.0);
      EXPECT_LT((metric_tensor(*m, x, c * v).g - g).cwiseAbs().maxCoeff(), 1e-8 * g.cwiseAbs().maxCoeff()) << name;
      EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Fundamental, Bilinearity) {
  auto m = zoo("perturbed_finsler");
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const Vec x = sample_point(m->chart(), rng);
    const Vec v = sample_cone_vector(*m, x, rng);
    const Vec a = sample_gaussian(2, rng), b = sample_gaussian(2, rng), c = sample_gaussian(2, rng);
    EXPECT_NEAR(inner(*m, x, v, a + b, c), inner(*m, x, v, a, c) + inner(*m, x, v, b, c), 1e-10);
  }
}

TEST(Fundamental, Classify) {
  auto m = zoo("minkowski");
  const Vec o = vec({0, 0});
  CausalClass a = classify(*m, o, vec({1, 0}));
  EXPECT_EQ(a.kind, CausalKind::kTimelike);
  EXPECT_EQ(a.orientation, TimeOrientation::kFuture);
  CausalClass b = classify(*m, o, vec({1, 1}));
  EXPECT_EQ(b.kind, CausalKind::kLightlike);
  EXPECT_EQ(b.orientation, TimeOrientation::kFuture);
  CausalClass c = classify(*m, o, vec({0, 1}));
  EXPECT_EQ(c.kind, CausalKind::kSpacelike);
  EXPECT_EQ(c.orientation, TimeOrientation::kNone);
  EXPECT_EQ(classify(*m, o, vec({0, 0})).kind, CausalKind::kZero);
  EXPECT_EQ(classify(*m, o, vec({-2, 1})).orientation, TimeOrientation::kPast);
  for (double s : {0.01, 3.0, 100.0}) EXPECT_EQ(classify(*m, o, s * vec({1, 0.99})).kind, CausalKind::kTimelike);
}

TEST(Fundamental, NormF) {
  auto m = zoo("minkowski");
  EXPECT_NEAR(norm_F(*m, vec({0, 0}), vec({2, 1})), std::sqrt(3.0), 1e-15);
  EXPECT_EQ(norm_F(*m, vec({0, 0}), vec({1, -1})), 0.0);
  EXPECT_THROW(norm_F(*m, vec({0, 0}), vec({0, 1})), Error);
  auto f = zoo("de_sitter", 3);
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    Sample s = timelike_sample(*f, rng);
    EXPECT_NEAR(norm_F(*f, s.x, 2.5 * s.v), 2.5 * norm_F(*f, s.x, s.v), 1e-10);
  }
}

TEST(Fundamental, ReverseCauchySchwarz) {
  for (const std::string& name : zoo_names()) {
    auto m = zoo(name);
    Rng rng(31);
    for (int k = 0; k < 1000; ++k) {
      Sample s = timelike_sample(*m, rng);
      const Vec w = sample_gaussian(m->dim(), rng);
      const Mat g = fundamental_matrix(*m, s.x, s.v);
      const double F2 = -2 * eval_L(*m, s.x, s.v);
      const double q = F2 * w.dot(g * w) + std::pow(s.v.dot(g * w), 2);
      const double scale = std::pow(g.cwiseAbs().maxCoeff() * s.v.norm() * w.norm(), 2);
      EXPECT_GE(q, -1e-9 * scale) << name;
    }
  }
}
