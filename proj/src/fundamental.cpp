#include "lfgeom/fundamental.hpp"

#include <cmath>

#include "lfgeom/errors.hpp"

namespace lfgeom {

std::string_view to_string(CausalKind kind) {
  switch (kind) {
    case CausalKind::kTimelike: return "timelike";
    case CausalKind::kLightlike: return "lightlike";
    case CausalKind::kSpacelike: return "spacelike";
    case CausalKind::kZero: return "zero";
  }
  return "?";
}

std::string_view to_string(TimeOrientation orientation) {
  switch (orientation) {
    case TimeOrientation::kFuture: return "future";
    case TimeOrientation::kPast: return "past";
    case TimeOrientation::kNone: return "n/a";
  }
  return "?";
}

Mat fundamental_matrix(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  LagrangianDerivatives d;
  model.derivatives(x, v, 2, d);
  const int n = model.dim();
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = d.Lvv(i, j);
  return g;
}

MetricAtV metric_tensor(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  require_in_chart(model, x);
  require_nonzero(v);
  require_in_cone(model, v);
  Mat g = fundamental_matrix(model, x, v);
  if (!g.allFinite()) throw Error(ErrorCode::kOracleFailure, "non-finite fundamental tensor");
  const double scale = 1.0 + g.cwiseAbs().maxCoeff();
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::kSignatureViolation, "fundamental tensor is not symmetric");
  }
  Mat sym = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  int negative = 0;
  for (int i = 0; i < model.dim(); ++i) {
    double lam = es.eigenvalues()(i);
    if (std::abs(lam) <= 1e-12 * scale) throw Error(ErrorCode::kSignatureViolation, "degenerate fundamental tensor");
    if (lam < 0) ++negative;
  }
  if (negative != 1) throw Error(ErrorCode::kSignatureViolation, "fundamental tensor is not of signature (-,+,...,+)");
  return {sym, x, v};
}

double inner(const SpacetimeModel& model, const Vec& x, const Vec& v, const Vec& a, const Vec& b) {
  return a.dot(metric_tensor(model, x, v).g * b);
}

CausalClass classify(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  require_in_chart(model, x);
  if (v.cwiseAbs().maxCoeff() == 0.0) return {CausalKind::kZero, TimeOrientation::kNone};
  // Outside a declared cone the Lagrangian is not certified; the vector is
  // classified as spacelike there (the causal cone of such models lies inside it).
  if (!model.in_cone(v)) return {CausalKind::kSpacelike, TimeOrientation::kNone};
  const double L = model.lagrangian(x, v);
  if (!std::isfinite(L)) throw Error(ErrorCode::kOracleFailure, "non-finite Lagrangian value");
  CausalClass out;
  if (std::abs(L) <= kLightlikeBand * v.squaredNorm()) {
    out.kind = CausalKind::kLightlike;
  } else if (L < 0) {
    out.kind = CausalKind::kTimelike;
  } else {
    return {CausalKind::kSpacelike, TimeOrientation::kNone};
  }
  const Vec X = model.orientation(x);
  const double pairing = X.dot(fundamental_matrix(model, x, X) * v);
  out.orientation = pairing < 0 ? TimeOrientation::kFuture : TimeOrientation::kPast;
  return out;
}

double norm_F(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  CausalClass c = classify(model, x, v);
  if (c.kind == CausalKind::kZero) return 0.0;
  if (!c.causal()) throw Error(ErrorCode::kNotCausal, "F is defined on causal vectors only");
  return std::sqrt(std::max(0.0, -2.0 * model.lagrangian(x, v)));
}

}  // namespace lfgeom
