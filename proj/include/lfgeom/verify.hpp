#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfgeom/curvature.hpp"
#include "lfgeom/geodesics.hpp"
#include "lfgeom/models.hpp"

namespace lfgeom {

// Common report shape: {check, verdict, worst_deficit, witness, seed, runtime_ms}
// plus a free-form "details" object.
struct CheckReport {
  std::string check;
  bool pass = true;
  std::optional<double> worst_deficit;
  nlohmann::json witness;  // null when nothing failed
  std::uint64_t seed = 0;
  std::optional<double> runtime_ms;
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

nlohmann::json to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);

struct ConcavityReport {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<bool> skipped;
  double worst_deficit = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  // Grid index where the worst slack occurred, and which test produced it ("chord" or "midpoint").
  int witness_index = -1;
  std::string witness_test;
};

// Concavity of t ↦ τ(η(t), ξ(t)) on a uniform grid over [0, 1]: three-point midpoint test on
// consecutive triples plus the endpoint chord inequality. Both paths must live on [0, 1].
ConcavityReport check_concavity_pair(const GeodesicPath& eta, const GeodesicPath& xi, int grid_size = 33,
                                     bool timelike_only = false);

// Concavity deficit threshold for a grid whose largest value is max_value.
double concavity_tolerance(double max_value);

// A curve s ↦ point on [0, 1].
using PointCurve = std::function<Vec(double)>;

struct VariationReport {
  bool pass = true;
  double worst_deficit = 0.0;
  bool variation_timelike = true;
  double witness_s = 0.0;
  double witness_t = 0.0;
};

// σ(·, s) = BVP geodesic from α(s) to β(s); V = ∂_s σ by differences in s (step 1e-4);
// V must be timelike and t ↦ F(V(t, s)) concave (threshold −tolerance·(1 + max F)).
VariationReport check_variation_concavity(const ModelPtr& model, const PointCurve& alpha, const PointCurve& beta,
                                          int t_grid = 33, int s_grid = 17, double tolerance = 1e-5);

enum class CapsuleSide { kFuture, kPast };

struct CapsuleSpec {
  GeodesicPath gamma;
  double r = 0.3;
  CapsuleSide side = CapsuleSide::kFuture;
  int member_pairs = 64;
  int s_grid = 17;
  int max_draws = 10000;
};

// Membership value max_t τ(γ(t), z) of z for the future capsule along γ.
double capsule_membership(const GeodesicPath& gamma, const Vec& z);

CheckReport check_capsule(const ModelPtr& model, const CapsuleSpec& spec, double tolerance, std::uint64_t seed);

struct ParallelReport {
  double max_deviation = 0.0;
  bool pass = true;
};

// Transport V0 along the path (reference = tangent) and compare L(V(t)) with L(V0).
ParallelReport check_parallel_L_constancy(const GeodesicPath& path, const Vec& V0, double tolerance);

struct TheoremBudget {
  int flag_samples = 200;
  int concavity_pairs = 12;
  int grid_size = 33;
  int capsule_pairs = 16;
  int s_grid = 17;
  double capsule_r = 0.3;
  int berwald_points = 4;
  int berwald_dirs = 6;
};

struct TheoremReport {
  std::vector<CheckReport> conditions;  // (I) .. (V)
  bool berwald = true;
  bool agree = true;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

// Sub-scans; each report's seed is the run seed, substreams are split by label.
CheckReport scan_flag_curvature(const ModelPtr& model, int samples, std::uint64_t seed);
CheckReport scan_concavity(const ModelPtr& model, int pairs, int grid_size, bool timelike_only, std::uint64_t seed);
CheckReport scan_capsules(const ModelPtr& model, CapsuleSide side, int pairs, int s_grid, double r, std::uint64_t seed);
CheckReport scan_berwald(const ModelPtr& model, int points, int dirs, std::uint64_t seed);
CheckReport scan_parallel(const ModelPtr& model, int paths, double tolerance, std::uint64_t seed);

TheoremReport verify_theorem(const ModelPtr& model, const TheoremBudget& budget, std::uint64_t seed);

}  // namespace lfgeom
