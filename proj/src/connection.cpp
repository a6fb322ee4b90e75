#include "lfgeom/connection.hpp"

#include <cmath>

#include "lfgeom/errors.hpp"
#include "lfgeom/rng.hpp"
#include "lfgeom/sampling.hpp"

namespace lfgeom {

Mat invert_metric(const Mat& g) {
  const int n = static_cast<int>(g.rows());
  Eigen::PartialPivLU<Mat> lu(g);
  Mat inv = lu.inverse();
  // 1-norm condition number, exact for the small matrices used here.
  double norm_g = 0.0, norm_inv = 0.0;
  for (int j = 0; j < n; ++j) {
    norm_g = std::max(norm_g, g.col(j).cwiseAbs().sum());
    norm_inv = std::max(norm_inv, inv.col(j).cwiseAbs().sum());
  }
  const double cond = norm_g * norm_inv;
  if (!inv.allFinite() || !(cond <= 1e12)) {
    throw Error(ErrorCode::kSingularMetric, "fundamental tensor is numerically singular");
  }
  return inv;
}

SprayJet spray_jet(const SpacetimeModel& model, const Vec& x, const Vec& v, int order) {
  using D = LagrangianDerivatives;
  const int n = model.dim();
  SprayJet s;
  s.G = Vec::Zero(n);
  s.dv = Mat::Zero(n, n);
  s.dx = Mat::Zero(n, n);
  s.dvdv = Tensor3(n);
  s.dvdx = Tensor3(n);
  if (v.cwiseAbs().maxCoeff() == 0.0) {
    s.g = Mat::Zero(n, n);
    s.ginv = Mat::Zero(n, n);
    return s;
  }

  D d;
  model.derivatives(x, v, order + 2, d);
  s.g = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.g(i, j) = d.Lvv(i, j);
  s.ginv = invert_metric(s.g);

  // g ẍ + A = 0 with A_l = Σ_j L_{x^j v^l} v^j − L_{x^l}.
  Vec A(n);
  for (int l = 0; l < n; ++l) {
    double a = -d.Lx(l);
    for (int j = 0; j < n; ++j) a += d.Lxv(j, l) * v(j);
    A(l) = a;
  }
  s.G = s.ginv * A;
  if (order < 1) return s;

  // First derivatives in slot p (v-slots 0..n-1, x-slots n..2n-1).
  std::array<Mat, 2 * kMaxDim> dg;
  std::array<Vec, 2 * kMaxDim> dA, dG;
  for (int k = 0; k < n; ++k) {
    Mat gv(n, n), gx(n, n);
    Vec av(n), ax(n);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        gv(i, l) = d.Lvvv(i, l, k);
        gx(i, l) = d.Lxvv(k, i, l);
      }
    for (int l = 0; l < n; ++l) {
      double a = d.Lxv(k, l) - d.Lxv(l, k);
      double b = -d.Lxx(l, k);
      for (int j = 0; j < n; ++j) {
        a += d.Lxvv(j, l, k) * v(j);
        b += d.Lxxv(j, k, l) * v(j);
      }
      av(l) = a;
      ax(l) = b;
    }
    dg[k] = gv;
    dg[n + k] = gx;
    dA[k] = av;
    dA[n + k] = ax;
  }
  for (int p = 0; p < 2 * n; ++p) dG[p] = s.ginv * (dA[p] - dg[p] * s.G);
  for (int k = 0; k < n; ++k) {
    s.dv.col(k) = dG[k];
    s.dx.col(k) = dG[n + k];
  }
  if (order < 2) return s;

  // Second derivatives with at least one v-slot: (v_k, v_m) and (v_k, x_b).
  for (int k = 0; k < n; ++k) {
    for (int q = 0; q < 2 * n; ++q) {
      const bool qx = q >= n;
      const int m = qx ? q - n : q;
      if (!qx && m < k) continue;
      Mat gkq(n, n);
      Vec akq(n);
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) gkq(i, l) = qx ? d.Lxvvv(m, i, l, k) : d.Lvvvv(i, l, k, m);
      for (int l = 0; l < n; ++l) {
        double a;
        if (qx) {
          a = d.Lxxv(k, m, l) - d.Lxxv(l, m, k);
          for (int j = 0; j < n; ++j) a += d.Lxxvv(j, m, l, k) * v(j);
        } else {
          a = d.Lxvv(k, l, m) + d.Lxvv(m, l, k) - d.Lxvv(l, k, m);
          for (int j = 0; j < n; ++j) a += d.Lxvvv(j, l, k, m) * v(j);
        }
        akq(l) = a;
      }
      Vec r = s.ginv * (akq - gkq * s.G - dg[k] * dG[q] - dg[q] * dG[k]);
      for (int i = 0; i < n; ++i) {
        if (qx) {
          s.dvdx(i, k, m) = r(i);
        } else {
          s.dvdv(i, k, m) = r(i);
          s.dvdv(i, m, k) = r(i);
        }
      }
    }
  }
  return s;
}

Vec spray(const SpacetimeModel& model, const Vec& x, const Vec& v) { return spray_jet(model, x, v, 0).G; }

namespace {

struct ConnectionParts {
  Mat ginv;
  Tensor3 gamma;
  Tensor3 chern;
  Vec G;
  Mat N;
};

ConnectionParts connection_parts(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  const int n = model.dim();
  SprayJet s = spray_jet(model, x, v, 1);
  LagrangianDerivatives d;
  model.derivatives(x, v, 3, d);
  ConnectionParts c;
  c.ginv = s.ginv;
  c.G = s.G;
  c.N = 0.5 * s.dv;
  c.gamma = Tensor3(n);
  c.chern = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double gam = 0.0, corr = 0.0;
        for (int l = 0; l < n; ++l) {
          gam += c.ginv(i, l) * (d.Lxvv(j, l, k) + d.Lxvv(k, j, l) - d.Lxvv(l, j, k));
          double t = 0.0;
          for (int m = 0; m < n; ++m)
            t += d.Lvvv(l, k, m) * c.N(m, j) + d.Lvvv(j, l, m) * c.N(m, k) - d.Lvvv(j, k, m) * c.N(m, l);
          corr += c.ginv(i, l) * t;
        }
        c.gamma(i, j, k) = 0.5 * gam;
        c.chern(i, j, k) = 0.5 * gam - 0.5 * corr;
      }
  return c;
}

}  // namespace

ConnectionEval connection_eval(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  require_in_chart(model, x);
  require_nonzero(v);
  require_in_cone(model, v);
  ConnectionParts c = connection_parts(model, x, v);
  ConnectionEval out{c.gamma, c.G, c.N, c.chern, x, v};
  if (!out.spray.allFinite() || !out.nonlinear.allFinite()) {
    throw Error(ErrorCode::kOracleFailure, "non-finite connection coefficients");
  }
  return out;
}

Tensor3 chern_coefficients(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  return connection_parts(model, x, v).chern;
}

Vec contract_chern(const Tensor3& chern, const Vec& a, const Vec& b) {
  const int n = chern.n;
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += chern(i, j, k) * a(j) * b(k);
    out(i) = s;
  }
  return out;
}

namespace {

// First derivative on a possibly nonuniform grid: three-point formulas.
Vec grid_derivative(const std::vector<double>& t, const std::vector<Vec>& y, std::size_t i) {
  const std::size_t m = t.size();
  std::size_t a, b, c;
  if (i == 0) {
    a = 0; b = 1; c = 2;
  } else if (i + 1 == m) {
    a = m - 3; b = m - 2; c = m - 1;
  } else {
    a = i - 1; b = i; c = i + 1;
  }
  // Derivative of the Lagrange interpolant through (a, b, c) evaluated at t_i.
  const double ti = t[i];
  const double ta = t[a], tb = t[b], tc = t[c];
  double wa = ((ti - tb) + (ti - tc)) / ((ta - tb) * (ta - tc));
  double wb = ((ti - ta) + (ti - tc)) / ((tb - ta) * (tb - tc));
  double wc = ((ti - ta) + (ti - tb)) / ((tc - ta) * (tc - tb));
  return wa * y[a] + wb * y[b] + wc * y[c];
}

}  // namespace

std::vector<Vec> covariant_derivative(const SpacetimeModel& model, const CurveSamples& curve,
                                      const std::vector<Vec>& field, ReferencePolicy reference,
                                      const std::optional<Vec>& fixed_reference) {
  const std::size_t m = curve.t.size();
  if (curve.x.size() != m || curve.xdot.size() != m || field.size() != m) {
    throw Error(ErrorCode::kPreconditionViolated, "curve and field sample counts differ");
  }
  if (m < 5) throw Error(ErrorCode::kKnotGridTooCoarse, "at least five knots are needed to differentiate a field");
  for (std::size_t i = 0; i < m; ++i) require_in_chart(model, curve.x[i]);
  if (reference == ReferencePolicy::kFixed && (!fixed_reference || fixed_reference->cwiseAbs().maxCoeff() == 0.0)) {
    throw Error(ErrorCode::kZeroReference, "fixed reference vector must be nonzero");
  }

  // Reliability: compare the derivative with the one from the grid thinned by two.
  std::vector<double> t2;
  std::vector<Vec> y2;
  for (std::size_t i = 0; i < m; i += 2) {
    t2.push_back(curve.t[i]);
    y2.push_back(field[i]);
  }
  double scale = 0.0, gap = 0.0;
  std::vector<Vec> dY(m);
  for (std::size_t i = 0; i < m; ++i) {
    dY[i] = grid_derivative(curve.t, field, i);
    scale = std::max(scale, dY[i].cwiseAbs().maxCoeff() + field[i].cwiseAbs().maxCoeff());
  }
  if (t2.size() >= 3) {
    for (std::size_t i = 0; i < t2.size(); ++i) {
      gap = std::max(gap, (grid_derivative(t2, y2, i) - dY[2 * i]).cwiseAbs().maxCoeff());
    }
  }
  if (gap > 1e-2 * (1.0 + scale)) {
    throw Error(ErrorCode::kKnotGridTooCoarse, "field varies too fast for the knot grid");
  }

  std::vector<Vec> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    Vec w;
    switch (reference) {
      case ReferencePolicy::kTangent: w = curve.xdot[i]; break;
      case ReferencePolicy::kField: w = field[i]; break;
      case ReferencePolicy::kFixed: w = *fixed_reference; break;
    }
    if (w.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorCode::kZeroReference, "reference vector vanishes on the curve");
    out[i] = dY[i] + contract_chern(chern_coefficients(model, curve.x[i], w), curve.xdot[i], field[i]);
  }
  return out;
}

double berwald_threshold(double chern_scale) { return 1e-7 * (1.0 + chern_scale); }

double berwald_deviation(const SpacetimeModel& model, const Vec& x, int sample_count, std::uint64_t seed) {
  require_in_chart(model, x);
  if (sample_count < 2) throw Error(ErrorCode::kPreconditionViolated, "sample_count must be at least 2");
  Rng rng = Rng(seed).split("berwald-directions");
  std::vector<Tensor3> chern;
  chern.reserve(sample_count);
  for (int s = 0; s < sample_count; ++s) {
    Vec u = sample_unit_direction(model, x, rng);
    chern.push_back(connection_eval(model, x, u).chern);
  }
  double worst = 0.0;
  for (int a = 0; a < sample_count; ++a)
    for (int b = a + 1; b < sample_count; ++b) worst = std::max(worst, chern[a].max_abs_diff(chern[b]));
  return worst;
}

}  // namespace lfgeom
