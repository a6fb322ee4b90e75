#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lfgeom/models.hpp"

namespace lfgeom {

// Formal Christoffel symbols, spray, nonlinear connection and Chern coefficients at (x, v).
// Index conventions: gamma(i, j, k) = γ^i_jk, nonlinear(i, j) = N^i_j, chern(i, j, k) = Γ^i_jk.
struct ConnectionEval {
  Tensor3 gamma;
  Vec spray;
  Mat nonlinear;
  Tensor3 chern;
  Vec x;
  Vec v;
};

// Spray G and its derivatives; geodesics solve x'' + G(x, x') = 0.
// dv(i, p) = ∂G^i/∂v^p, dx(i, b) = ∂G^i/∂x^b,
// dvdv(i, p, q) = ∂²G^i/∂v^p∂v^q, dvdx(i, p, b) = ∂²G^i/∂v^p∂x^b.
struct SprayJet {
  Mat g;
  Mat ginv;
  Vec G;
  Mat dv;
  Mat dx;
  Tensor3 dvdv;
  Tensor3 dvdx;
};

// Inverse of g_v by partial-pivoting LU; raises singular-metric beyond condition 1e12.
Mat invert_metric(const Mat& g);

// order 0: G only; 1: adds first derivatives; 2: adds second derivatives.
// Unchecked inputs; G(0) := 0.
SprayJet spray_jet(const SpacetimeModel& model, const Vec& x, const Vec& v, int order);

// Spray only (hot path for the geodesic integrator).
Vec spray(const SpacetimeModel& model, const Vec& x, const Vec& v);

ConnectionEval connection_eval(const SpacetimeModel& model, const Vec& x, const Vec& v);

// Unchecked Chern coefficients Γ(v).
Tensor3 chern_coefficients(const SpacetimeModel& model, const Vec& x, const Vec& v);

// Γ^i_jk(w) a^j b^k.
Vec contract_chern(const Tensor3& chern, const Vec& a, const Vec& b);

enum class ReferencePolicy { kTangent, kField, kFixed };

// A curve sampled on a knot grid with its velocity.
struct CurveSamples {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> xdot;
};

// D_ẋ^w Y on the knots; Y' is differentiated on the knot grid (second-order stencils).
std::vector<Vec> covariant_derivative(const SpacetimeModel& model, const CurveSamples& curve,
                                      const std::vector<Vec>& field, ReferencePolicy reference,
                                      const std::optional<Vec>& fixed_reference = std::nullopt);

// Max over sampled direction pairs of ‖Γ(v1) − Γ(v2)‖∞ at x.
double berwald_deviation(const SpacetimeModel& model, const Vec& x, int sample_count, std::uint64_t seed);

// Berwald decision threshold: deviation <= 1e-7 (1 + ‖Γ‖∞).
double berwald_threshold(double chern_scale);

}  // namespace lfgeom
