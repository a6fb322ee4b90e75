#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lfgeom/connection.hpp"
#include "lfgeom/models.hpp"
#include "lfgeom/ode.hpp"

namespace lfgeom {

// Dense geodesic: knot states plus accelerations for Hermite interpolation.
struct GeodesicPath {
  ModelPtr model;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<Vec> a;

  double t0() const { return t.front(); }
  double t1() const { return t.back(); }
  // Zero initial velocity: the constant curve, represented without integrating.
  bool is_constant() const;

  Vec position(double s) const;
  Vec velocity(double s) const;
  // Index of the knot at exactly s, or -1.
  int knot_at(double s) const;

  CurveSamples samples() const;
};

struct GeodesicOptions {
  double tol = 1e-10;
  double max_step = 0.0;
  std::vector<double> forced;
  bool forced_only = false;
};

// x'' + G(x, x') = 0 on [t0, t1]. Raises left-chart / left-validity-cone / stiff-failure.
GeodesicPath integrate_geodesic(const ModelPtr& model, const Vec& x, const Vec& v, double t0, double t1,
                                const GeodesicOptions& options = {});

GeodesicPath constant_path(const ModelPtr& model, const Vec& x, double t0 = 0.0, double t1 = 1.0);

Vec exp_map(const ModelPtr& model, const Vec& x, const Vec& v);

struct BvpOptions {
  std::optional<Vec> guess;
  int max_iterations = 50;
  double tol = 1e-9;
  // Output times forced into the returned path.
  std::vector<double> forced;
};

struct BvpSolution {
  Vec velocity;
  GeodesicPath path;
  int iterations = 0;
};

// Shooting for exp_x(v) = y by damped Newton with a finite-difference Jacobian.
BvpSolution solve_bvp(const ModelPtr& model, const Vec& x, const Vec& y, const BvpOptions& options = {});

struct TransportedField {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> V;
};

// D V = 0 along a geodesic; values on the path's knots.
TransportedField parallel_transport(const GeodesicPath& path, const Vec& V0, ReferencePolicy reference,
                                    const std::optional<Vec>& fixed_reference = std::nullopt);

// A C¹ curve given by position and velocity maps on [t0, t1].
struct C1Curve {
  double t0 = 0.0;
  double t1 = 1.0;
  std::function<Vec(double)> position;
  std::function<Vec(double)> velocity;
};

TransportedField parallel_transport(const ModelPtr& model, const C1Curve& curve, const Vec& V0,
                                    ReferencePolicy reference, const std::vector<double>& output_times,
                                    const std::optional<Vec>& fixed_reference = std::nullopt);

struct TimeSeparation {
  double tau = 0.0;
  // Initial velocity of the connecting geodesic (empty when none was computed).
  Vec velocity;
  bool related = false;
};

// Chart-local τ(x, y): the length of the connecting geodesic when it is future causal, else 0.
TimeSeparation time_separation_full(const ModelPtr& model, const Vec& x, const Vec& y,
                                    const std::optional<Vec>& guess = std::nullopt);
double time_separation(const ModelPtr& model, const Vec& x, const Vec& y);

}  // namespace lfgeom
