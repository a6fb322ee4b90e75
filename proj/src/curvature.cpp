#include "lfgeom/curvature.hpp"

#include <cmath>
#include <limits>

#include "lfgeom/connection.hpp"
#include "lfgeom/errors.hpp"
#include "lfgeom/fundamental.hpp"
#include "lfgeom/parallel.hpp"
#include "lfgeom/rng.hpp"
#include "lfgeom/sampling.hpp"

namespace lfgeom {

Mat curvature_matrix(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  const int n = model.dim();
  SprayJet s = spray_jet(model, x, v, 2);
  Mat N = 0.5 * s.dv;
  Mat R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double r = s.dx(i, j);
      for (int k = 0; k < n; ++k) {
        r -= 0.5 * s.dvdx(i, j, k) * v(k);
        r += 0.5 * s.dvdv(i, j, k) * s.G(k);
        r -= N(i, k) * N(k, j);
      }
      R(i, j) = r;
    }
  return R;
}

Vec curvature_R(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& w) {
  require_in_chart(model, x);
  require_nonzero(v);
  require_in_cone(model, v);
  Vec out = curvature_matrix(model, x, v) * w;
  if (!out.allFinite()) throw Error(ErrorCode::kOracleFailure, "non-finite curvature");
  return out;
}

Vec curvature_R_berwald(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& w) {
  require_in_chart(model, x);
  require_nonzero(v);
  require_in_cone(model, v);
  const int n = model.dim();
  const Tensor3 G0 = chern_coefficients(model, x, v);
  std::vector<Tensor3> dG(n, Tensor3(n));  // dG[b](i, j, k) = ∂_b Γ^i_jk
  for (int b = 0; b < n; ++b) {
    const double h = 1e-4 * (1.0 + std::abs(x(b)));
    Vec xp = x, xm = x;
    xp(b) += h;
    xm(b) -= h;
    Tensor3 gp = chern_coefficients(model, xp, v), gm = chern_coefficients(model, xm, v);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) dG[b](i, j, k) = (gp(i, j, k) - gm(i, j, k)) / (2 * h);
  }
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double Rij = 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double r = dG[j](i, k, l) - dG[k](i, j, l);
          for (int m = 0; m < n; ++m) r += G0(i, j, m) * G0(m, k, l) - G0(i, k, m) * G0(m, j, l);
          Rij += r * v(k) * v(l);
        }
      out(i) += Rij * w(j);
    }
  return out;
}

double flag_curvature(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& w) {
  require_in_chart(model, x);
  if (!classify(model, x, v).future_timelike()) {
    throw Error(ErrorCode::kNotTimelike, "flagpole must be future-directed timelike");
  }
  const Mat g = fundamental_matrix(model, x, v);
  const double vv = v.dot(g * v), ww = w.dot(g * w), vw = v.dot(g * w);
  const double den = vv * ww - vw * vw;
  if (std::abs(den) < 1e-10 * v.squaredNorm() * w.squaredNorm()) {
    throw Error(ErrorCode::kDegenerateFlag, "flag vectors are (nearly) parallel");
  }
  if (!(den < 0)) throw Error(ErrorCode::kDegenerateFlag, "flag denominator is not negative");
  const Vec Rw = curvature_matrix(model, x, v) * w;
  return w.dot(g * Rw) / den;
}

namespace {

OdeState pack4(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
  OdeState y;
  for (const Vec* p : {&a, &b, &c, &d})
    for (int i = 0; i < p->size(); ++i) y.push_back((*p)(i));
  return y;
}

Vec part(const OdeState& y, int k, int n) {
  Vec out(n);
  for (int i = 0; i < n; ++i) out(i) = y[k * n + i];
  return out;
}

// State (x, ẋ, J, P) with P = D J:  J' = P − N J,  P' = −R J − N P.
OdeTrajectory jacobi_ode(const SpacetimeModel& m, const Vec& x, const Vec& v, const Vec& J0, const Vec& P0,
                         double t0, double t1, const std::vector<double>& times, bool forced_only,
                         const OdeStepCheck& check = {}) {
  const int n = m.dim();
  auto rhs = [&m, n](const OdeState& y, OdeState& dy, double) {
    Vec xs = part(y, 0, n), vs = part(y, 1, n), J = part(y, 2, n), P = part(y, 3, n);
    SprayJet s = spray_jet(m, xs, vs, 2);
    Mat N = 0.5 * s.dv;
    Mat R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double r = s.dx(i, j);
        for (int k = 0; k < n; ++k) {
          r += -0.5 * s.dvdx(i, j, k) * vs(k) + 0.5 * s.dvdv(i, j, k) * s.G(k) - N(i, k) * N(k, j);
        }
        R(i, j) = r;
      }
    Vec dJ = P - N * J;
    Vec dP = -R * J - N * P;
    for (int i = 0; i < n; ++i) {
      dy[i] = vs(i);
      dy[n + i] = -s.G(i);
      dy[2 * n + i] = dJ(i);
      dy[3 * n + i] = dP(i);
    }
  };
  OdeOptions o;
  o.forced_only = forced_only;
  return integrate_ode(rhs, pack4(x, v, J0, P0), t0, t1, times, o, check);
}

}  // namespace

JacobiSolution jacobi_propagate(const GeodesicPath& along, const Vec& J0, const Vec& DJ0,
                                const std::vector<double>& extra_times) {
  if (along.is_constant()) throw Error(ErrorCode::kPreconditionViolated, "Jacobi fields need a nonconstant geodesic");
  const SpacetimeModel& m = *along.model;
  const int n = m.dim();
  std::vector<double> times = along.t;
  times.insert(times.end(), extra_times.begin(), extra_times.end());
  auto check = [&m, n](double, const OdeState& y) {
    if (!m.chart().contains(part(y, 0, n), 1e-9)) throw Error(ErrorCode::kLeftChart, "geodesic left the chart");
    if (!m.in_cone(part(y, 1, n))) throw Error(ErrorCode::kLeftValidityCone, "velocity left the validity cone");
  };
  OdeTrajectory traj = jacobi_ode(m, along.x.front(), along.v.front(), J0, DJ0, along.t0(), along.t1(), times, true, check);
  JacobiSolution out;
  out.along = along;
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out.t.push_back(traj.t[k]);
    out.J.push_back(part(traj.y[k], 2, n));
    out.DJ.push_back(part(traj.y[k], 3, n));
  }
  return out;
}

double jacobi_F_second_derivative(const ModelPtr& model, const Vec& x, const Vec& v, const Vec& w) {
  const SpacetimeModel& m = *model;
  require_in_chart(m, x);
  if (!classify(m, x, v).future_timelike() || !classify(m, x, w).future_timelike()) {
    throw Error(ErrorCode::kNotTimelike, "v and w must be future timelike");
  }
  const int n = m.dim();
  {
    Mat pair(n, 2);
    pair << v, w;
    Eigen::JacobiSVD<Mat> svd(pair);
    if (svd.singularValues()(1) < 1e-8 * svd.singularValues()(0)) {
      throw Error(ErrorCode::kDegenerateFlag, "v and w must be linearly independent");
    }
  }
  constexpr double h = 1e-3;
  const std::vector<double> times = {h, 2 * h, 3 * h, 4 * h};
  OdeTrajectory traj = jacobi_ode(m, x, w, v, Vec::Zero(n), 0.0, 4 * h, times, true);
  double f[5];
  for (int k = 0; k < 5; ++k) {
    Vec xs = part(traj.y[k], 0, n), J = part(traj.y[k], 2, n);
    if (!classify(m, xs, J).future_timelike()) {
      throw Error(ErrorCode::kJacobiLeftCone, "Jacobi field left the timelike cone");
    }
    f[k] = std::sqrt(-2.0 * m.lagrangian(xs, J));
  }
  return (35 * f[0] - 104 * f[1] + 114 * f[2] - 56 * f[3] + 11 * f[4]) / (12 * h * h);
}

CurvatureScan curvature_scan(const ModelPtr& model, int samples, std::uint64_t seed) {
  const SpacetimeModel& m = *model;
  Rng root = Rng(seed).split("curvature-scan");
  CurvatureScan out;
  out.samples = parallel_map<FlagSample>(samples, [&](int i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    for (int attempt = 0; attempt < 100; ++attempt) {
      FlagSample s;
      s.x = sample_point(m.chart(), rng, 0.9);
      s.v = sample_future_timelike(m, s.x, rng);
      s.w = sample_gaussian(m.dim(), rng);
      try {
        s.K = flag_curvature(m, s.x, s.v, s.w);
        return s;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateFlag) throw;
      }
    }
    throw Error(ErrorCode::kSamplingExhausted, "no admissible flag found");
  });
  out.min_K = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (out.samples[i].K < out.min_K) {
      out.min_K = out.samples[i].K;
      out.argmin = static_cast<int>(i);
    }
  }
  return out;
}

}  // namespace lfgeom
