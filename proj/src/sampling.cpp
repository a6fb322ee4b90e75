#include "lfgeom/sampling.hpp"

#include <cmath>

#include "lfgeom/errors.hpp"
#include "lfgeom/fundamental.hpp"

namespace lfgeom {

namespace {
constexpr int kMaxDraws = 10000;
}

Vec sample_point(const ChartBox& box, Rng& rng, double shrink) {
  const int n = static_cast<int>(box.lo.size());
  Vec c = box.center(), h = box.half_width();
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = c(i) + shrink * h(i) * rng.uniform(-1.0, 1.0);
  return x;
}

Vec sample_gaussian(int n, Rng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

Vec sample_cone_vector(const SpacetimeModel& model, const Vec& x, Rng& rng) {
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    Vec v = sample_gaussian(model.dim(), rng);
    if (model.cone()) {
      // Concentrate the time component so that a fair share of draws lands in the cone.
      v(0) = (v(0) >= 0 ? 1.0 : -1.0) * (1.0 + std::abs(v(0))) * std::sqrt(model.cone()->c) * 1.5;
    }
    double norm = v.norm();
    if (norm < 1e-3 || !model.in_cone(v)) continue;
    return v / norm * rng.uniform(0.5, 2.0);
  }
  (void)x;
  throw Error(ErrorCode::kSamplingExhausted, "no vector found inside the validity cone");
}

Vec sample_future_timelike(const SpacetimeModel& model, const Vec& x, Rng& rng, double max_tilt) {
  const int n = model.dim();
  const Vec X = model.orientation(x);
  const double sign = X(0) >= 0 ? 1.0 : -1.0;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    Vec u = Vec::Zero(n);
    u(0) = sign;
    Vec s = sample_gaussian(n - 1, rng);
    double r = max_tilt * std::pow(rng.uniform(), 1.0 / (n - 1));
    if (s.norm() > 0) u.tail(n - 1) = s / s.norm() * r;
    if (!model.in_cone(u)) continue;
    if (!classify(model, x, u).future_timelike()) continue;
    return u * rng.uniform(0.5, 2.0);
  }
  throw Error(ErrorCode::kSamplingExhausted, "no future timelike vector found");
}

Vec sample_unit_direction(const SpacetimeModel& model, const Vec& x, Rng& rng) {
  const Vec X = model.orientation(x);
  const Mat gX = fundamental_matrix(model, x, X);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    Vec u = sample_cone_vector(model, x, rng);
    double q = u.dot(gX * u);
    if (std::abs(q) < 1e-6 * u.squaredNorm()) continue;
    return u / std::sqrt(std::abs(q));
  }
  throw Error(ErrorCode::kSamplingExhausted, "no unit direction found");
}

}  // namespace lfgeom
