#pragma once

#include <cstdint>
#include <vector>

#include "lfgeom/geodesics.hpp"
#include "lfgeom/models.hpp"

namespace lfgeom {

// R^i_j(v) from the spray: ∂G/∂x − (∂N/∂x)v + (∂N/∂v)G − N N. Unchecked inputs.
Mat curvature_matrix(const SpacetimeModel& model, const Vec& x, const Vec& v);

// R_v(w) = R^i_j(v) w^j.
Vec curvature_R(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& w);

// Same quantity through R^i_ljk v^k v^l, with ∂Γ/∂x by central differences and the
// ∂Γ/∂v terms dropped: meaningful on Berwald models only.
Vec curvature_R_berwald(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& w);

// K(v, w) = g_v(R_v(w), w) / (g_v(v,v) g_v(w,w) − g_v(v,w)²) for future timelike v.
double flag_curvature(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& w);

struct JacobiSolution {
  GeodesicPath along;
  std::vector<double> t;
  std::vector<Vec> J;
  std::vector<Vec> DJ;
};

// D D J + R_η̇(J) = 0 along a nonconstant geodesic, covariant derivatives referenced to η̇.
// Output on the knots of `along` plus any extra times.
JacobiSolution jacobi_propagate(const GeodesicPath& along, const Vec& J0, const Vec& DJ0,
                                const std::vector<double>& extra_times = {});

// d²/dt² F(J(t)) at t = 0 for the Jacobi field along exp_x(t w) with J(0) = v, DJ(0) = 0.
double jacobi_F_second_derivative(const ModelPtr& model, const Vec& x, const Vec& v, const Vec& w);

struct FlagSample {
  Vec x;
  Vec v;
  Vec w;
  double K = 0.0;
};

struct CurvatureScan {
  std::vector<FlagSample> samples;
  double min_K = 0.0;
  int argmin = -1;
};

// Random timelike flags over the chart; sample i draws from the seed's i-th substream.
CurvatureScan curvature_scan(const ModelPtr& model, int samples, std::uint64_t seed);

}  // namespace lfgeom
