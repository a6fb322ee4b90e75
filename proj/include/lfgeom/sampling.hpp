#pragma once

#include "lfgeom/models.hpp"
#include "lfgeom/rng.hpp"

namespace lfgeom {

// Uniform point in the box shrunk about its centre by `shrink`.
Vec sample_point(const ChartBox& box, Rng& rng, double shrink = 0.8);

// Gaussian vector with the given dimension.
Vec sample_gaussian(int n, Rng& rng);

// Nonzero vector with random direction and scale in [0.5, 2], inside the validity cone when one is declared.
Vec sample_cone_vector(const SpacetimeModel& model, const Vec& x, Rng& rng);

// Future-directed timelike vector at x (inside the cone) with spatial tilt at most `max_tilt`
// relative to the orientation axis and scale in [0.5, 2].
Vec sample_future_timelike(const SpacetimeModel& model, const Vec& x, Rng& rng, double max_tilt = 0.8);

// Direction on the unit g_X-sphere {|g_X(u, u)| = 1} restricted to the validity cone.
Vec sample_unit_direction(const SpacetimeModel& model, const Vec& x, Rng& rng);

}  // namespace lfgeom
