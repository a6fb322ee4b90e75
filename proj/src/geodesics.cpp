#include "lfgeom/geodesics.hpp"

#include <algorithm>
#include <cmath>

#include "lfgeom/errors.hpp"
#include "lfgeom/fundamental.hpp"

namespace lfgeom {

namespace {

constexpr double kChartSlack = 1e-9;

OdeState pack(const Vec& a, const Vec& b) {
  OdeState y(a.size() + b.size());
  for (int i = 0; i < a.size(); ++i) y[i] = a(i);
  for (int i = 0; i < b.size(); ++i) y[a.size() + i] = b(i);
  return y;
}

Vec slice(const OdeState& y, int offset, int n) {
  Vec out(n);
  for (int i = 0; i < n; ++i) out(i) = y[offset + i];
  return out;
}

void check_state(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  if (!model.chart().contains(x, kChartSlack)) throw Error(ErrorCode::kLeftChart, "geodesic left the chart");
  if (!model.in_cone(v)) throw Error(ErrorCode::kLeftValidityCone, "velocity left the validity cone");
}

// Index i with t[i] <= s <= t[i + 1].
std::size_t interval(const std::vector<double>& t, double s) {
  if (s <= t.front()) return 0;
  if (s >= t.back()) return t.size() - 2;
  auto it = std::upper_bound(t.begin(), t.end(), s);
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

Vec hermite(double t0, double t1, const Vec& p0, const Vec& m0, const Vec& p1, const Vec& m1, double s) {
  const double h = t1 - t0;
  const double u = (s - t0) / h;
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * h * m0 + (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * h * m1;
}

}  // namespace

bool GeodesicPath::is_constant() const { return v.empty() || v.front().cwiseAbs().maxCoeff() == 0.0; }

Vec GeodesicPath::position(double s) const {
  if (t.size() == 1 || is_constant()) return x.front();
  std::size_t i = interval(t, s);
  return hermite(t[i], t[i + 1], x[i], v[i], x[i + 1], v[i + 1], s);
}

Vec GeodesicPath::velocity(double s) const {
  if (t.size() == 1 || is_constant()) return v.front();
  std::size_t i = interval(t, s);
  return hermite(t[i], t[i + 1], v[i], a[i], v[i + 1], a[i + 1], s);
}

int GeodesicPath::knot_at(double s) const {
  auto it = std::lower_bound(t.begin(), t.end(), s);
  if (it != t.end() && *it == s) return static_cast<int>(it - t.begin());
  return -1;
}

CurveSamples GeodesicPath::samples() const { return {t, x, v}; }

GeodesicPath constant_path(const ModelPtr& model, const Vec& x, double t0, double t1) {
  require_in_chart(*model, x);
  const Vec zero = Vec::Zero(model->dim());
  GeodesicPath p;
  p.model = model;
  p.t = {t0, t1};
  p.x = {x, x};
  p.v = {zero, zero};
  p.a = {zero, zero};
  return p;
}

GeodesicPath integrate_geodesic(const ModelPtr& model, const Vec& x, const Vec& v, double t0, double t1,
                                const GeodesicOptions& options) {
  const SpacetimeModel& m = *model;
  const int n = m.dim();
  require_in_chart(m, x);
  if (v.size() != n) throw Error(ErrorCode::kPreconditionViolated, "velocity has wrong dimension");
  if (v.cwiseAbs().maxCoeff() == 0.0) return constant_path(model, x, t0, t1);
  require_in_cone(m, v);

  auto rhs = [&m, n](const OdeState& y, OdeState& dy, double) {
    Vec xs = slice(y, 0, n), vs = slice(y, n, n);
    Vec G = spray(m, xs, vs);
    for (int i = 0; i < n; ++i) {
      dy[i] = vs(i);
      dy[n + i] = -G(i);
    }
  };
  auto check = [&m, n](double, const OdeState& y) { check_state(m, slice(y, 0, n), slice(y, n, n)); };

  OdeOptions ode;
  ode.abs_tol = ode.rel_tol = options.tol;
  ode.max_step = options.max_step;
  ode.forced_only = options.forced_only;
  OdeTrajectory traj = integrate_ode(rhs, pack(x, v), t0, t1, options.forced, ode, check);

  GeodesicPath p;
  p.model = model;
  p.t = std::move(traj.t);
  p.x.reserve(p.t.size());
  p.v.reserve(p.t.size());
  p.a.reserve(p.t.size());
  for (const OdeState& y : traj.y) {
    Vec xs = slice(y, 0, n), vs = slice(y, n, n);
    p.a.push_back(-spray(m, xs, vs));
    p.x.push_back(std::move(xs));
    p.v.push_back(std::move(vs));
  }
  return p;
}

Vec exp_map(const ModelPtr& model, const Vec& x, const Vec& v) {
  GeodesicOptions o;
  o.forced_only = true;
  return integrate_geodesic(model, x, v, 0.0, 1.0, o).x.back();
}

BvpSolution solve_bvp(const ModelPtr& model, const Vec& x, const Vec& y, const BvpOptions& options) {
  const int n = model->dim();
  require_in_chart(*model, x);
  require_in_chart(*model, y);
  if ((x - y).cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::kPreconditionViolated, "boundary value problem needs distinct endpoints");
  }
  GeodesicOptions quick;
  quick.forced_only = true;
  auto endpoint = [&](const Vec& v) { return integrate_geodesic(model, x, v, 0.0, 1.0, quick).x.back(); };

  Vec v = options.guess ? *options.guess : Vec(y - x);
  Vec r = endpoint(v) - y;  // failures at the initial guess propagate unchanged
  double res = r.cwiseAbs().maxCoeff();
  int iter = 0;
  for (; iter < options.max_iterations && res > options.tol; ++iter) {
    Mat J(n, n);
    const double h = 1e-6 * (1.0 + v.cwiseAbs().maxCoeff());
    for (int k = 0; k < n; ++k) {
      Vec vk = v;
      vk(k) += h;
      J.col(k) = (endpoint(vk) - y - r) / h;
    }
    Eigen::PartialPivLU<Mat> lu(J);
    Vec step = -lu.solve(r);
    if (!step.allFinite()) throw Error(ErrorCode::kNoConvergence, "singular shooting Jacobian");
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 12; ++halving, lambda *= 0.5) {
      Vec trial = v + lambda * step;
      try {
        Vec rt = endpoint(trial) - y;
        double rest = rt.cwiseAbs().maxCoeff();
        if (rest < res || rest <= options.tol) {
          v = trial;
          r = rt;
          res = rest;
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kLeftChart && e.code() != ErrorCode::kLeftValidityCone &&
            e.code() != ErrorCode::kOutsideValidityCone && e.code() != ErrorCode::kStiffFailure &&
            e.code() != ErrorCode::kSingularMetric) {
          throw;
        }
      }
    }
    if (!accepted) throw Error(ErrorCode::kNoConvergence, "damped Newton stalled");
  }
  if (res > options.tol) throw Error(ErrorCode::kNoConvergence, "shooting did not converge");

  GeodesicOptions full;
  full.forced = options.forced;
  BvpSolution sol{v, integrate_geodesic(model, x, v, 0.0, 1.0, full), iter};
  return sol;
}

namespace {

TransportedField transport_impl(const SpacetimeModel& m, double t0, double t1, const OdeState& y0, bool carries_curve,
                                const std::function<void(double, Vec&, Vec&)>& curve, const Vec& V0,
                                ReferencePolicy reference, const std::optional<Vec>& fixed,
                                const std::vector<double>& output_times) {
  const int n = m.dim();
  if (reference == ReferencePolicy::kFixed && (!fixed || fixed->cwiseAbs().maxCoeff() == 0.0)) {
    throw Error(ErrorCode::kZeroReference, "fixed reference vector must be nonzero");
  }
  auto reference_at = [&](const Vec& xdot, const Vec& V) -> Vec {
    Vec w;
    switch (reference) {
      case ReferencePolicy::kTangent: w = xdot; break;
      case ReferencePolicy::kField: w = V; break;
      case ReferencePolicy::kFixed: w = *fixed; break;
    }
    if (w.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorCode::kZeroReference, "reference vector vanishes");
    return w;
  };
  const int off = carries_curve ? 2 * n : 0;
  auto rhs = [&](const OdeState& y, OdeState& dy, double t) {
    Vec xs(n), xdot(n);
    if (carries_curve) {
      xs = slice(y, 0, n);
      xdot = slice(y, n, n);
      Vec G = spray(m, xs, xdot);
      for (int i = 0; i < n; ++i) {
        dy[i] = xdot(i);
        dy[n + i] = -G(i);
      }
    } else {
      curve(t, xs, xdot);
    }
    Vec V = slice(y, off, n);
    Vec dV = -contract_chern(chern_coefficients(m, xs, reference_at(xdot, V)), xdot, V);
    for (int i = 0; i < n; ++i) dy[off + i] = dV(i);
  };
  OdeState start = y0;
  for (int i = 0; i < n; ++i) start.push_back(V0(i));
  OdeOptions ode;
  ode.forced_only = true;
  OdeTrajectory traj = integrate_ode(rhs, start, t0, t1, output_times, ode);

  TransportedField out;
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    Vec xs(n), xdot(n);
    if (carries_curve) {
      xs = slice(traj.y[k], 0, n);
    } else {
      curve(traj.t[k], xs, xdot);
    }
    out.t.push_back(traj.t[k]);
    out.x.push_back(xs);
    out.V.push_back(slice(traj.y[k], off, n));
  }
  return out;
}

}  // namespace

TransportedField parallel_transport(const GeodesicPath& path, const Vec& V0, ReferencePolicy reference,
                                    const std::optional<Vec>& fixed_reference) {
  const SpacetimeModel& m = *path.model;
  if (path.is_constant()) {
    if (reference == ReferencePolicy::kTangent) throw Error(ErrorCode::kZeroReference, "constant curve has no tangent");
    return {path.t, path.x, std::vector<Vec>(path.t.size(), V0)};
  }
  return transport_impl(m, path.t0(), path.t1(), pack(path.x.front(), path.v.front()), true, {}, V0, reference,
                        fixed_reference, path.t);
}

TransportedField parallel_transport(const ModelPtr& model, const C1Curve& curve, const Vec& V0,
                                    ReferencePolicy reference, const std::vector<double>& output_times,
                                    const std::optional<Vec>& fixed_reference) {
  auto eval = [&curve](double t, Vec& x, Vec& xdot) {
    x = curve.position(t);
    xdot = curve.velocity(t);
  };
  return transport_impl(*model, curve.t0, curve.t1, {}, false, eval, V0, reference, fixed_reference, output_times);
}

TimeSeparation time_separation_full(const ModelPtr& model, const Vec& x, const Vec& y, const std::optional<Vec>& guess) {
  const SpacetimeModel& m = *model;
  require_in_chart(m, x);
  require_in_chart(m, y);
  TimeSeparation out;
  if ((x - y).cwiseAbs().maxCoeff() == 0.0) {
    out.velocity = Vec::Zero(m.dim());
    return out;
  }
  BvpOptions opts;
  opts.guess = guess;
  BvpSolution sol;
  try {
    sol = solve_bvp(model, x, y, opts);
  } catch (const Error& e) {
    // On a model with a validity cone, a connecting geodesic that would leave the cone
    // does not belong to the certified causal structure: the points are unrelated.
    if (m.cone() && (e.code() == ErrorCode::kOutsideValidityCone || e.code() == ErrorCode::kLeftValidityCone)) {
      return out;
    }
    if (e.code() == ErrorCode::kNoConvergence || e.code() == ErrorCode::kLeftChart ||
        e.code() == ErrorCode::kStiffFailure) {
      throw Error(ErrorCode::kBvpFailure, e.what());
    }
    throw;
  }
  out.velocity = sol.velocity;
  CausalClass c = classify(m, x, sol.velocity);
  if (!c.future_causal()) return out;
  out.related = true;

  // Gauss-Legendre (4 nodes) on 8 equal subintervals; states at the nodes are forced outputs.
  static const double node[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double weight[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  constexpr int kPieces = 8;
  std::vector<double> times;
  for (int p = 0; p < kPieces; ++p)
    for (double z : node) times.push_back((p + 0.5 * (z + 1.0)) / kPieces);
  GeodesicOptions go;
  go.forced = times;
  go.forced_only = true;
  GeodesicPath path = integrate_geodesic(model, x, sol.velocity, 0.0, 1.0, go);
  double tau = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    int idx = path.knot_at(times[k]);
    const Vec& pos = path.x[idx];
    const Vec& vel = path.v[idx];
    tau += weight[k % 4] * 0.5 / kPieces * std::sqrt(std::max(0.0, -2.0 * m.lagrangian(pos, vel)));
  }
  out.tau = tau;
  return out;
}

double time_separation(const ModelPtr& model, const Vec& x, const Vec& y) {
  return time_separation_full(model, x, y).tau;
}

}  // namespace lfgeom
