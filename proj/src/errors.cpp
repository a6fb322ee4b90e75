#include "lfgeom/errors.hpp"

#include <algorithm>
#include <cmath>

#include "lfgeom/types.hpp"

namespace lfgeom {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPointOutsideChart: return "point-outside-chart";
    case ErrorCode::kZeroVector: return "zero-vector";
    case ErrorCode::kOutsideValidityCone: return "outside-validity-cone";
    case ErrorCode::kOrderExceeded: return "order-exceeded";
    case ErrorCode::kOracleFailure: return "oracle-failure";
    case ErrorCode::kUnknownName: return "unknown-name";
    case ErrorCode::kInvalidParams: return "invalid-params";
    case ErrorCode::kSignatureViolation: return "signature-violation";
    case ErrorCode::kSingularMetric: return "singular-metric";
    case ErrorCode::kNotCausal: return "not-causal";
    case ErrorCode::kZeroReference: return "zero-reference";
    case ErrorCode::kKnotGridTooCoarse: return "knot-grid-too-coarse";
    case ErrorCode::kLeftChart: return "left-chart";
    case ErrorCode::kLeftValidityCone: return "left-validity-cone";
    case ErrorCode::kStiffFailure: return "stiff-failure";
    case ErrorCode::kNoConvergence: return "no-convergence";
    case ErrorCode::kDegenerateFlag: return "degenerate-flag";
    case ErrorCode::kNotTimelike: return "not-timelike";
    case ErrorCode::kJacobiLeftCone: return "jacobi-left-cone";
    case ErrorCode::kEndpointConditionViolated: return "endpoint-condition-violated";
    case ErrorCode::kPreconditionViolated: return "precondition-violated";
    case ErrorCode::kBvpFailure: return "bvp-failure";
    case ErrorCode::kSamplingExhausted: return "sampling-exhausted";
    case ErrorCode::kInvalidMeasure: return "invalid-measure";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kOptimizerStall: return "optimizer-stall";
    case ErrorCode::kBadConfig: return "bad-config";
  }
  return "unknown-error";
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) m = std::max(m, std::abs((*this)(i, j, k)));
  return m;
}

double Tensor3::max_abs_diff(const Tensor3& other) const {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) m = std::max(m, std::abs((*this)(i, j, k) - other(i, j, k)));
  return m;
}

}  // namespace lfgeom
