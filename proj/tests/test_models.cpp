#include <gtest/gtest.h>

#include "lfgeom/errors.hpp"
#include "support.hpp"

using namespace lfgeom;
using namespace testsupport;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kBadConfig;
}

}  // namespace

TEST(Models, MinkowskiValue) {
  auto m = zoo("minkowski");
  EXPECT_DOUBLE_EQ(eval_L(*m, vec({0, 0}), vec({1, 0})), -0.5);
  EXPECT_DOUBLE_EQ(eval_partial(*m, vec({0, 0}), vec({1, 0.3}), MultiIndex{}.dv(0).dv(0)), -1.0);
  EXPECT_EQ(eval_partial(*m, vec({0.2, 0}), vec({1, 0.3}), MultiIndex{}.dx(1).dv(1)), 0.0);
}

TEST(Models, Homogeneity) {
  for (const std::string& name : zoo_names()) {
    auto m = zoo(name);
    Rng rng(11);
    for (int k = 0; k < 1000; ++k) {
      const Vec x = sample_point(m->chart(), rng);
      const Vec v = sample_cone_vector(*m, x, rng);
      const double L = eval_L(*m, x, v);
      EXPECT_NEAR(eval_L(*m, x, 2.0 * v), 4.0 * L, 1e-9 * (1 + std::abs(L))) << name;
    }
  }
}

// Against an independent symbolic form of the static-patch metric.
TEST(Models, DeSitterValue) {
  auto m = zoo("de_sitter", 3);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const Vec x = sample_point(m->chart(), rng);
    const Vec v = sample_gaussian(3, rng);
    const double r2 = x(1) * x(1) + x(2) * x(2);
    const double yv = x(1) * v(1) + x(2) * v(2);
    const double expect = 0.5 * (-(1 - r2) * v(0) * v(0) + v(1) * v(1) + v(2) * v(2) + yv * yv / (1 - r2));
    EXPECT_NEAR(eval_L(*m, x, v), expect, 1e-12 * (1 + std::abs(expect)));
  }
}

TEST(Models, FinslerQuarticPartialMatchesStencil) {
  auto m = zoo("flat_finsler", 2, 0.03);
  const Vec x = vec({0, 0}), v = vec({1, 0});
  const double exact = eval_partial(*m, x, v, MultiIndex{}.dv(1).dv(1).dv(1).dv(1));
  // Five-point fourth difference in v¹.
  const double h = 1e-2;
  auto L = [&](double s) { return m->lagrangian(x, vec({1, s})); };
  const double fd = (L(2 * h) - 4 * L(h) + 6 * L(0) - 4 * L(-h) + L(-2 * h)) / std::pow(h, 4);
  EXPECT_NEAR(exact, fd, 1e-6 * std::abs(exact));
  EXPECT_NEAR(exact, 24 * 0.03, 1e-12);
}

// Closed-form partials against finite differences of L values, on every zoo model.
TEST(Models, PartialsMatchFiniteDifferences) {
  for (const std::string& name : zoo_names()) {
    auto m = zoo(name);
    Rng rng(5);
    for (int k = 0; k < 20; ++k) {
      const Vec x = sample_point(m->chart(), rng, 0.7);
      const Vec v = sample_cone_vector(*m, x, rng);
      const Mat H = fd_hessian_v(*m, x, v);
      for (int i = 0; i < m->dim(); ++i)
        for (int j = 0; j < m->dim(); ++j)
          EXPECT_NEAR(eval_partial(*m, x, v, MultiIndex{}.dv(i).dv(j)), H(i, j), 1e-5 * (1 + H.cwiseAbs().maxCoeff()))
              << name;
      for (int a = 0; a < m->dim(); ++a) {
        const double h = 1e-5;
        Vec xp = x, xm = x;
        xp(a) += h;
        xm(a) -= h;
        const double fd = (m->lagrangian(xp, v) - m->lagrangian(xm, v)) / (2 * h);
        EXPECT_NEAR(eval_partial(*m, x, v, MultiIndex{}.dx(a)), fd, 1e-7 * (1 + std::abs(fd))) << name;
      }
    }
  }
}

TEST(Models, FallbackPartialsOnBlackBox) {
  auto ref = zoo("perturbed_finsler");
  auto bb = function_model("bb", 2, ref->chart(), [ref](const Vec& x, const Vec& v) { return ref->lagrangian(x, v); },
                           ref->cone());
  Rng rng(8);
  for (int k = 0; k < 20; ++k) {
    const Vec x = sample_point(ref->chart(), rng);
    const Vec v = sample_cone_vector(*ref, x, rng);
    for (const MultiIndex& a : {MultiIndex{}.dv(0).dv(1), MultiIndex{}.dv(1).dv(1).dv(1), MultiIndex{}.dx(1).dv(1).dv(1),
                                MultiIndex{}.dv(0).dv(1).dv(1).dv(1)}) {
      const double exact = ref->partial(x, v, a);
      EXPECT_NEAR(bb->partial(x, v, a), exact, 1e-6 * (1 + std::abs(exact)));
    }
  }
}

TEST(Models, FlatFinslerZeroEpsilonIsMinkowski) {
  auto a = zoo("minkowski"), b = zoo("flat_finsler", 2, 0.0);
  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    const Vec x = sample_point(a->chart(), rng);
    const Vec v = sample_gaussian(2, rng);
    EXPECT_NEAR(eval_L(*a, x, v), eval_L(*b, x, v), 1e-12);
    EXPECT_NEAR(eval_partial(*a, x, v, MultiIndex{}.dv(1).dv(1)), eval_partial(*b, x, v, MultiIndex{}.dv(1).dv(1)), 1e-12);
  }
}

TEST(Models, Reverse) {
  auto m = zoo("flat_finsler");
  auto r = reverse_model(m);
  auto rr = reverse_model(r);
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const Vec x = sample_point(m->chart(), rng);
    const Vec v = sample_cone_vector(*m, x, rng);
    EXPECT_EQ(eval_L(*r, x, v), eval_L(*m, x, -v));
    EXPECT_EQ(eval_L(*rr, x, v), eval_L(*m, x, v));
    EXPECT_EQ(r->partial(x, v, MultiIndex{}.dv(1).dv(1).dv(1)), -m->partial(x, -v, MultiIndex{}.dv(1).dv(1).dv(1)));
  }
  EXPECT_EQ(r->orientation(vec({0, 0})), -m->orientation(vec({0, 0})));
  EXPECT_TRUE(classify(*r, vec({0, 0}), vec({-1, 0})).future_timelike());
}

TEST(Models, Errors) {
  auto m = zoo("flat_finsler");
  EXPECT_EQ(code_of([&] { eval_L(*m, vec({10, 0}), vec({1, 0})); }), ErrorCode::kPointOutsideChart);
  EXPECT_EQ(code_of([&] { eval_L(*m, vec({0, 0}), vec({0, 0})); }), ErrorCode::kZeroVector);
  EXPECT_EQ(code_of([&] { eval_L(*m, vec({0, 0}), vec({1, 1})); }), ErrorCode::kOutsideValidityCone);
  EXPECT_EQ(code_of([&] { eval_partial(*m, vec({0, 0}), vec({1, 0}), MultiIndex{}.dx(0).dx(0).dx(1)); }),
            ErrorCode::kOrderExceeded);
  EXPECT_EQ(code_of([&] { zoo_model("anti_de_sitter"); }), ErrorCode::kUnknownName);
  EXPECT_EQ(code_of([&] { zoo("flat_finsler", 2, 0.5); }), ErrorCode::kInvalidParams);
  EXPECT_EQ(code_of([&] { model_from_json({{"name", "minkowski"}, {"colour", 3}}); }), ErrorCode::kBadConfig);
  ZooParams p;
  p.dim = 3;
  p.chart_min = vec({-1, -1.2, -0.1});
  p.chart_max = vec({1, 1.2, 0.1});
  EXPECT_EQ(code_of([&] { zoo_model("de_sitter", p); }), ErrorCode::kInvalidParams);
}

TEST(Models, JsonRoundTrip) {
  auto m = model_from_json({{"name", "product_sphere"}, {"dim", 3}, {"radius", 2.0}});
  auto m2 = model_from_json(m->params());
  const Vec x = vec({0.1, 0.2, -0.3}), v = vec({1, 0.2, 0.1});
  EXPECT_EQ(eval_L(*m, x, v), eval_L(*m2, x, v));
  EXPECT_EQ(m->dim(), 3);
}
