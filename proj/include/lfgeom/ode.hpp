#pragma once

#include <functional>
#include <vector>

namespace lfgeom {

using OdeState = std::vector<double>;
using OdeRhs = std::function<void(const OdeState& y, OdeState& dydt, double t)>;
// Called after every accepted step; throws to abort the integration.
using OdeStepCheck = std::function<void(double t, const OdeState& y)>;

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  // Largest step; 0 selects span / 32.
  double max_step = 0.0;
  int max_steps = 200000;
  // Record only the forced output times (plus the endpoints).
  bool forced_only = false;
};

struct OdeTrajectory {
  std::vector<double> t;
  std::vector<OdeState> y;
};

// Adaptive Dormand-Prince 4(5) from t0 to t1 (t1 >= t0). Every time in `forced` that lies
// in (t0, t1) is hit exactly and recorded. Raises stiff-failure if the step size collapses.
OdeTrajectory integrate_ode(const OdeRhs& rhs, const OdeState& y0, double t0, double t1,
                            const std::vector<double>& forced = {}, const OdeOptions& options = {},
                            const OdeStepCheck& check = {});

}  // namespace lfgeom
