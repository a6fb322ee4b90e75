#pragma once

#include <stdexcept>
#include <string>

#include "lfgeom/types.hpp"
#include "oracle/levi_civita_gen.hpp"

namespace oracle {

// Metric, Christoffel symbols and Riemann tensor of a quadratic zoo model from the sympy-generated code.
struct Quadratic {
  int n = 0;
  lfgeom::Mat g;
  lfgeom::Tensor3 gamma;
  double riem[3][3][3][3] = {};

  // R(w, v)v: the operator in the Jacobi equation.
  lfgeom::Vec jacobi_operator(const lfgeom::Vec& v, const lfgeom::Vec& w) const {
    lfgeom::Vec out = lfgeom::Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) out(i) += riem[i][j][k][l] * v(j) * w(k) * v(l);
    return out;
  }

  double sectional(const lfgeom::Vec& v, const lfgeom::Vec& w) const {
    const double den = v.dot(g * v) * w.dot(g * w) - std::pow(v.dot(g * w), 2);
    return w.dot(g * jacobi_operator(v, w)) / den;
  }
};

template <int N, typename Fn>
Quadratic fill(Fn fn, const lfgeom::Vec& x, double R) {
  double g[N][N], ga[N][N][N], ri[N][N][N][N];
  fn(x.data(), R, g, ga, ri);
  Quadratic q;
  q.n = N;
  q.g = lfgeom::Mat(N, N);
  q.gamma = lfgeom::Tensor3(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      q.g(i, j) = g[i][j];
      for (int k = 0; k < N; ++k) {
        q.gamma(i, j, k) = ga[i][j][k];
        for (int l = 0; l < N; ++l) q.riem[i][j][k][l] = ri[i][j][k][l];
      }
    }
  return q;
}

inline Quadratic quadratic(const std::string& name, const lfgeom::Vec& x, double R = 1.0) {
  const int n = static_cast<int>(x.size());
  if (name == "minkowski") {
    Quadratic q;
    q.n = n;
    q.g = lfgeom::Mat::Identity(n, n);
    q.g(0, 0) = -1;
    q.gamma = lfgeom::Tensor3(n);
    return q;
  }
  if (n == 2 && name == "de_sitter") return fill<2>(de_sitter_2, x, R);
  if (n == 3 && name == "de_sitter") return fill<3>(de_sitter_3, x, R);
  if (n == 2 && name == "product_hyperbolic") return fill<2>(product_hyperbolic_2, x, R);
  if (n == 3 && name == "product_hyperbolic") return fill<3>(product_hyperbolic_3, x, R);
  if (n == 2 && name == "product_sphere") return fill<2>(product_sphere_2, x, R);
  if (n == 3 && name == "product_sphere") return fill<3>(product_sphere_3, x, R);
  throw std::invalid_argument("no oracle for " + name);
}

}  // namespace oracle
