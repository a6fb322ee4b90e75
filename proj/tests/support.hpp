#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lfgeom/fundamental.hpp"
#include "lfgeom/models.hpp"
#include "lfgeom/rng.hpp"
#include "lfgeom/sampling.hpp"

namespace testsupport {

using lfgeom::Mat;
using lfgeom::ModelPtr;
using lfgeom::SpacetimeModel;
using lfgeom::Vec;

inline ModelPtr zoo(const std::string& name, int dim = 0, double epsilon = 0.02) {
  lfgeom::ZooParams p;
  p.dim = dim > 0 ? dim : (name.rfind("product", 0) == 0 ? 3 : 2);
  p.epsilon = epsilon;
  return lfgeom::zoo_model(name, p);
}

inline const std::vector<std::string>& quadratic_names() {
  static const std::vector<std::string> n{"minkowski", "de_sitter", "product_hyperbolic", "product_sphere"};
  return n;
}

inline const std::vector<std::string>& berwald_names() {
  static const std::vector<std::string> n{"minkowski", "de_sitter", "product_hyperbolic", "product_sphere",
                                          "flat_finsler"};
  return n;
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// v-Hessian of L from central differences of L values alone.
inline Mat fd_hessian_v(const SpacetimeModel& m, const Vec& x, const Vec& v, double h = 1e-3) {
  const int n = m.dim();
  Mat H(n, n);
  auto L = [&](const Vec& w) { return m.lagrangian(x, w); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto f = [&](double a, double b) {
        Vec w = v;
        w(i) += a * h;
        w(j) += b * h;
        return L(w);
      };
      if (i == j) {
        H(i, i) = (-f(2, 0) + 16 * f(1, 0) - 30 * f(0, 0) + 16 * f(-1, 0) - f(-2, 0)) / (12 * h * h);
      } else {
        H(i, j) = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * h * h);
      }
    }
  return H;
}

// A random future timelike vector at a random chart point.
struct Sample {
  Vec x;
  Vec v;
};

inline Sample timelike_sample(const SpacetimeModel& m, lfgeom::Rng& rng, double shrink = 0.9) {
  Sample s;
  s.x = lfgeom::sample_point(m.chart(), rng, shrink);
  s.v = lfgeom::sample_future_timelike(m, s.x, rng);
  return s;
}

}  // namespace testsupport
