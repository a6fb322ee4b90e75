#pragma once

#include <string_view>

#include "lfgeom/models.hpp"

namespace lfgeom {

// g_ij(v) at a point-direction pair.
struct MetricAtV {
  Mat g;
  Vec x;
  Vec v;
};

enum class CausalKind { kTimelike, kLightlike, kSpacelike, kZero };
enum class TimeOrientation { kFuture, kPast, kNone };

struct CausalClass {
  CausalKind kind = CausalKind::kZero;
  TimeOrientation orientation = TimeOrientation::kNone;

  bool causal() const { return kind == CausalKind::kTimelike || kind == CausalKind::kLightlike; }
  bool future_causal() const { return causal() && orientation == TimeOrientation::kFuture; }
  bool future_timelike() const { return kind == CausalKind::kTimelike && orientation == TimeOrientation::kFuture; }
};

std::string_view to_string(CausalKind kind);
std::string_view to_string(TimeOrientation orientation);

// Relative width of the lightlike band: |L| <= kLightlikeBand |v|^2.
inline constexpr double kLightlikeBand = 1e-12;

// Checked: v nonzero and in the cone, Hessian symmetric with signature (-,+,...,+).
MetricAtV metric_tensor(const SpacetimeModel& model, const Vec& x, const Vec& v);

// Unchecked Hessian of L in v; used on hot paths after the inputs were validated.
Mat fundamental_matrix(const SpacetimeModel& model, const Vec& x, const Vec& v);

// g_v(a, b).
double inner(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& a, const Vec& b);

CausalClass classify(const SpacetimeModel& model, const Vec& x, const Vec& v);

// F(v) = sqrt(-2 L(v)) on causal vectors.
double norm_F(const SpacetimeModel& model, const Vec& x, const Vec& v);

}  // namespace lfgeom
