#include "lfgeom/ode.hpp"

#include <algorithm>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "lfgeom/errors.hpp"

namespace lfgeom {

namespace odeint = boost::numeric::odeint;

OdeTrajectory integrate_ode(const OdeRhs& rhs, const OdeState& y0, double t0, double t1,
                            const std::vector<double>& forced, const OdeOptions& options,
                            const OdeStepCheck& check) {
  if (!(t1 >= t0)) throw Error(ErrorCode::kPreconditionViolated, "integration span must be increasing");
  OdeTrajectory out;
  out.t.push_back(t0);
  out.y.push_back(y0);
  if (t1 == t0) return out;

  std::vector<double> stops;
  for (double s : forced)
    if (s > t0 && s < t1) stops.push_back(s);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  stops.push_back(t1);

  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<OdeState>());
  auto system = [&rhs](const OdeState& y, OdeState& dydt, double t) { rhs(y, dydt, t); };

  const double span = t1 - t0;
  const double max_step = options.max_step > 0 ? options.max_step : span / 32.0;
  const double min_step = 1e-13 * std::max(1.0, std::abs(span));
  OdeState y = y0;
  double t = t0;
  double dt = std::min(max_step, 1e-2 * span);
  std::size_t next = 0;
  int steps = 0;
  while (next < stops.size()) {
    const double target = stops[next];
    const double remaining = target - t;
    const bool hits = dt >= remaining;
    double h = hits ? remaining : dt;
    auto result = stepper.try_step(system, y, t, h);
    if (++steps > options.max_steps) throw Error(ErrorCode::kStiffFailure, "step budget exhausted");
    if (result == odeint::fail) {
      if (h < min_step) throw Error(ErrorCode::kStiffFailure, "step size collapsed");
      dt = h;
      continue;
    }
    for (double c : y)
      if (!std::isfinite(c)) throw Error(ErrorCode::kStiffFailure, "non-finite state");
    if (hits) {
      t = target;
      ++next;
      // A truncated final step says little about the natural step size.
      dt = std::min(max_step, std::max(dt, h));
    } else {
      dt = std::min(max_step, h);
    }
    if (check) check(t, y);
    if (!options.forced_only || hits) {
      out.t.push_back(t);
      out.y.push_back(y);
    }
  }
  return out;
}

}  // namespace lfgeom
