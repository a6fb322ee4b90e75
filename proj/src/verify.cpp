#include "lfgeom/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "lfgeom/connection.hpp"
#include "lfgeom/errors.hpp"
#include "lfgeom/fundamental.hpp"
#include "lfgeom/parallel.hpp"
#include "lfgeom/rng.hpp"
#include "lfgeom/sampling.hpp"

namespace lfgeom {

nlohmann::json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kBadConfig, "expected an array of numbers");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["verdict"] = pass ? "pass" : "fail";
  j["worst_deficit"] = worst_deficit ? nlohmann::json(*worst_deficit) : nlohmann::json(nullptr);
  j["witness"] = witness;
  j["seed"] = seed;
  j["runtime_ms"] = runtime_ms ? nlohmann::json(*runtime_ms) : nlohmann::json(nullptr);
  j["details"] = details;
  return j;
}

namespace {

std::vector<double> uniform_grid(int m) {
  std::vector<double> t(m);
  for (int i = 0; i < m; ++i) t[i] = static_cast<double>(i) / (m - 1);
  t.back() = 1.0;
  return t;
}

// Knot value when s is a knot, Hermite interpolant otherwise.
Vec path_point(const GeodesicPath& p, double s) {
  int k = p.knot_at(s);
  return k >= 0 ? p.x[k] : p.position(s);
}

bool same_point(const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff() <= 1e-12; }

// Error codes that make a sampled configuration unusable rather than the run invalid.
bool resample_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kLeftChart:
    case ErrorCode::kLeftValidityCone:
    case ErrorCode::kOutsideValidityCone:
    case ErrorCode::kPointOutsideChart:
    case ErrorCode::kEndpointConditionViolated:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kBvpFailure:
    case ErrorCode::kStiffFailure:
    case ErrorCode::kSamplingExhausted:
    case ErrorCode::kDegenerateFlag:
    case ErrorCode::kNotTimelike:
    case ErrorCode::kJacobiLeftCone:
      return true;
    default:
      return false;
  }
}

double min_half_width(const ChartBox& box) { return box.half_width().minCoeff(); }

Vec scaled_to(const Vec& v, double euclidean_length) { return v / v.norm() * euclidean_length; }

}  // namespace

double concavity_tolerance(double max_value) { return 1e-6 * (1.0 + max_value); }

ConcavityReport check_concavity_pair(const GeodesicPath& eta, const GeodesicPath& xi, int grid_size, bool timelike_only) {
  if (!eta.model || eta.model != xi.model) {
    throw Error(ErrorCode::kPreconditionViolated, "both paths must belong to the same model");
  }
  if (eta.t0() != 0.0 || eta.t1() != 1.0 || xi.t0() != 0.0 || xi.t1() != 1.0) {
    throw Error(ErrorCode::kPreconditionViolated, "paths must be parametrized on [0, 1]");
  }
  if (grid_size < 3) throw Error(ErrorCode::kPreconditionViolated, "grid needs at least three points");
  const ModelPtr& model = eta.model;
  if (timelike_only) {
    for (const GeodesicPath* p : {&eta, &xi}) {
      if (p->is_constant() || classify(*model, p->x.front(), p->v.front()).kind != CausalKind::kTimelike) {
        throw Error(ErrorCode::kPreconditionViolated, "timelike concavity needs timelike geodesics");
      }
    }
  }

  ConcavityReport rep;
  rep.grid = uniform_grid(grid_size);
  rep.values.assign(grid_size, 0.0);
  rep.skipped.assign(grid_size, false);
  std::optional<Vec> guess;
  for (int i = 0; i < grid_size; ++i) {
    const double t = rep.grid[i];
    const Vec p = path_point(eta, t), q = path_point(xi, t);
    const bool endpoint = (i == 0 || i == grid_size - 1);
    if (same_point(p, q)) {
      rep.values[i] = 0.0;
      continue;
    }
    try {
      TimeSeparation ts = time_separation_full(model, p, q, guess);
      rep.values[i] = ts.tau;
      if (ts.velocity.size() > 0 && ts.velocity.cwiseAbs().maxCoeff() > 0) guess = ts.velocity;
    } catch (const Error& e) {
      if (endpoint || !resample_error(e)) throw;
      rep.skipped[i] = true;
      continue;
    }
    if (endpoint && !(rep.values[i] > 0.0)) {
      throw Error(ErrorCode::kEndpointConditionViolated, "endpoints are neither chronologically related nor equal");
    }
  }

  double vmax = 0.0;
  for (int i = 0; i < grid_size; ++i)
    if (!rep.skipped[i]) vmax = std::max(vmax, rep.values[i]);
  rep.tolerance = concavity_tolerance(vmax);
  rep.worst_deficit = std::numeric_limits<double>::infinity();
  const double tau0 = rep.values.front(), tau1 = rep.values.back();
  for (int i = 1; i + 1 < grid_size; ++i) {
    if (rep.skipped[i]) continue;
    const double t = rep.grid[i];
    const double chord = rep.values[i] - ((1.0 - t) * tau0 + t * tau1);
    if (chord < rep.worst_deficit) {
      rep.worst_deficit = chord;
      rep.witness_index = i;
      rep.witness_test = "chord";
    }
    if (rep.skipped[i - 1] || rep.skipped[i + 1]) continue;
    const double mid = rep.values[i] - 0.5 * (rep.values[i - 1] + rep.values[i + 1]);
    if (mid < rep.worst_deficit) {
      rep.worst_deficit = mid;
      rep.witness_index = i;
      rep.witness_test = "midpoint";
    }
  }
  if (!std::isfinite(rep.worst_deficit)) rep.worst_deficit = 0.0;
  rep.pass = rep.worst_deficit >= -rep.tolerance;
  return rep;
}

VariationReport check_variation_concavity(const ModelPtr& model, const PointCurve& alpha, const PointCurve& beta,
                                          int t_grid, int s_grid, double tolerance) {
  const SpacetimeModel& m = *model;
  const std::vector<double> ts = uniform_grid(t_grid), ss = uniform_grid(s_grid);
  constexpr double h = 1e-4;
  std::optional<Vec> guess;
  auto sigma = [&](double s) {
    Vec a = alpha(s), b = beta(s);
    TimeSeparation rel = time_separation_full(model, a, b, guess);
    if (!(rel.tau > 0)) throw Error(ErrorCode::kPreconditionViolated, "alpha(s) must lie in the past of beta(s)");
    BvpOptions o;
    o.guess = rel.velocity;
    o.tol = 1e-12;
    o.forced = ts;
    BvpSolution sol = solve_bvp(model, a, b, o);
    guess = sol.velocity;
    std::vector<Vec> pts;
    for (double t : ts) pts.push_back(path_point(sol.path, t));
    return pts;
  };

  VariationReport rep;
  rep.worst_deficit = std::numeric_limits<double>::infinity();
  for (double s : ss) {
    // Central differences inside, second-order one-sided at the ends.
    std::vector<Vec> V(t_grid);
    if (s - h < 0.0) {
      auto f0 = sigma(s), f1 = sigma(s + h), f2 = sigma(s + 2 * h);
      for (int i = 0; i < t_grid; ++i) V[i] = (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2 * h);
    } else if (s + h > 1.0) {
      auto f0 = sigma(s), f1 = sigma(s - h), f2 = sigma(s - 2 * h);
      for (int i = 0; i < t_grid; ++i) V[i] = (3.0 * f0[i] - 4.0 * f1[i] + f2[i]) / (2 * h);
    } else {
      auto fm = sigma(s - h), fp = sigma(s + h);
      for (int i = 0; i < t_grid; ++i) V[i] = (fp[i] - fm[i]) / (2 * h);
    }
    auto pts = sigma(s);
    std::vector<double> F(t_grid);
    double fmax = 0.0;
    for (int i = 0; i < t_grid; ++i) {
      CausalClass c = classify(m, pts[i], V[i]);
      if (c.kind != CausalKind::kTimelike) {
        rep.variation_timelike = false;
        rep.pass = false;
        rep.witness_s = s;
        rep.witness_t = ts[i];
        F[i] = 0.0;
        continue;
      }
      F[i] = std::sqrt(-2.0 * m.lagrangian(pts[i], V[i]));
      fmax = std::max(fmax, F[i]);
    }
    for (int i = 1; i + 1 < t_grid; ++i) {
      double d = F[i] - 0.5 * (F[i - 1] + F[i + 1]);
      if (d < rep.worst_deficit) {
        rep.worst_deficit = d;
        if (d < -tolerance * (1.0 + fmax)) {
          rep.pass = false;
          rep.witness_s = s;
          rep.witness_t = ts[i];
        }
      }
    }
  }
  return rep;
}

double capsule_membership(const GeodesicPath& gamma, const Vec& z) {
  const ModelPtr& model = gamma.model;
  const std::vector<double> grid = uniform_grid(17);
  std::vector<double> val(grid.size(), -1.0);
  std::optional<Vec> guess;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    try {
      TimeSeparation ts = time_separation_full(model, path_point(gamma, grid[k]), z, guess);
      val[k] = ts.tau;
      if (ts.velocity.size() > 0 && ts.velocity.cwiseAbs().maxCoeff() > 0) guess = ts.velocity;
    } catch (const Error& e) {
      if (!resample_error(e)) throw;
    }
  }
  std::size_t best = static_cast<std::size_t>(std::max_element(val.begin(), val.end()) - val.begin());
  double best_val = val[best];
  if (best_val <= 0.0) return std::max(best_val, 0.0);
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[best + 1 == grid.size() ? best : best + 1];
  std::optional<Vec> warm = guess;
  auto neg_tau = [&](double t) {
    try {
      TimeSeparation ts = time_separation_full(model, gamma.position(t), z, warm);
      return -ts.tau;
    } catch (const Error& e) {
      if (!resample_error(e)) throw;
      return 0.0;
    }
  };
  std::uintmax_t iters = 40;
  auto res = boost::math::tools::brent_find_minima(neg_tau, lo, hi, 30, iters);
  return std::max(best_val, -res.second);
}

namespace {

GeodesicPath reversed_path(const GeodesicPath& p, const ModelPtr& reversed_model) {
  GeodesicPath out;
  out.model = reversed_model;
  const std::size_t m = p.t.size();
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t j = m - 1 - k;
    out.t.push_back(p.t0() + p.t1() - p.t[j]);
    out.x.push_back(p.x[j]);
    out.v.push_back(-p.v[j]);
    out.a.push_back(p.a[j]);
  }
  out.t.front() = p.t0();
  out.t.back() = p.t1();
  return out;
}

struct Member {
  Vec z;
  double t = 0.0;
};

}  // namespace

CheckReport check_capsule(const ModelPtr& model_in, const CapsuleSpec& spec_in, double tolerance, std::uint64_t seed) {
  if (!(spec_in.r > 0)) throw Error(ErrorCode::kPreconditionViolated, "capsule radius must be positive");
  if (spec_in.gamma.t0() != 0.0 || spec_in.gamma.t1() != 1.0) {
    throw Error(ErrorCode::kPreconditionViolated, "capsule geodesic must be parametrized on [0, 1]");
  }
  const bool past = spec_in.side == CapsuleSide::kPast;
  // Past capsules of L are future capsules of the reverse structure.
  const ModelPtr model = past ? reverse_model(model_in) : model_in;
  const GeodesicPath gamma = past ? reversed_path(spec_in.gamma, model) : spec_in.gamma;
  const SpacetimeModel& m = *model;
  const double r = spec_in.r;

  CheckReport rep;
  rep.check = past ? "capsule-past" : "capsule-future";
  rep.seed = seed;
  Rng root = Rng(seed).split("capsule");

  // Unit normal field along γ for the ruled members: a future timelike vector, made
  // g-orthogonal to γ̇ when γ is spacelike, parallel along γ.
  const std::vector<double> tgrid = uniform_grid(33);
  std::vector<Vec> normal;
  if (!gamma.is_constant()) {
    Rng nr = root.split("normal");
    const Vec x0 = gamma.x.front(), g0 = gamma.v.front();
    const CausalClass cg = classify(m, x0, g0);
    for (int attempt = 0; attempt < 1000 && normal.empty(); ++attempt) {
      Vec u = sample_future_timelike(m, x0, nr, 0.6);
      if (cg.kind == CausalKind::kSpacelike) {
        Mat g = fundamental_matrix(m, x0, u);
        u = u - (u.dot(g * g0) / g0.dot(g * g0)) * g0;
      }
      if (!m.in_cone(u) || !classify(m, x0, u).future_timelike()) continue;
      u /= std::sqrt(-2.0 * m.lagrangian(x0, u));
      try {
        TransportedField tf = parallel_transport(model, C1Curve{0.0, 1.0,
                                                                [&](double s) { return gamma.position(s); },
                                                                [&](double s) { return gamma.velocity(s); }},
                                                 u, ReferencePolicy::kTangent, tgrid);
        normal = tf.V;
      } catch (const Error& e) {
        if (!resample_error(e)) throw;
      }
    }
  }

  int draws = 0;
  auto propose = [&](Rng& rng, bool ruled, double t_hint) -> std::optional<Member> {
    ++draws;
    Member mem;
    try {
      if (ruled && !normal.empty()) {
        int k = static_cast<int>(std::lround(t_hint * (tgrid.size() - 1)));
        mem.t = tgrid[k];
        mem.z = exp_map(model, path_point(gamma, mem.t), r * normal[k]);
        return mem;
      }
      mem.t = rng.uniform();
      const Vec y = path_point(gamma, mem.t);
      Vec u = sample_future_timelike(m, y, rng, 0.7);
      u *= r * rng.uniform(1.0, 1.3) / std::sqrt(-2.0 * m.lagrangian(y, u));
      mem.z = exp_map(model, y, u);
      if (capsule_membership(gamma, mem.z) < r) return std::nullopt;
      return mem;
    } catch (const Error& e) {
      if (!resample_error(e)) throw;
      return std::nullopt;
    }
  };

  struct PairResult {
    bool used = false;
    double deficit = std::numeric_limits<double>::infinity();
    double s = 0.0;
    Member z1, z2;
    std::string kind;
  };
  std::vector<PairResult> results;
  const std::vector<double> sgrid = uniform_grid(spec_in.s_grid);
  int skipped = 0;
  for (int k = 0; k < spec_in.member_pairs; ++k) {
    Rng rng = root.split(static_cast<std::uint64_t>(k));
    const bool ruled = (k % 2 == 0) && !normal.empty();
    std::optional<Member> z1, z2;
    double ta = rng.uniform(0.0, 0.35), tb = rng.uniform(0.65, 1.0);
    while (!z1 && draws < spec_in.max_draws) z1 = propose(rng, ruled, ta);
    while (!z2 && draws < spec_in.max_draws) z2 = propose(rng, ruled, tb);
    if (!z1 || !z2) {
      if (results.empty()) throw Error(ErrorCode::kSamplingExhausted, "no capsule members found in the chart");
      break;
    }
    PairResult pr;
    pr.z1 = *z1;
    pr.z2 = *z2;
    pr.kind = ruled ? "ruled" : "random";
    BvpSolution alpha;
    try {
      BvpOptions o;
      o.forced = sgrid;
      alpha = solve_bvp(model, z1->z, z2->z, o);
    } catch (const Error& e) {
      if (!resample_error(e)) throw;
      ++skipped;
      continue;
    }
    pr.used = true;
    std::optional<Vec> guess;
    // Lower bounds from the interpolated parameter t = (1-s) t1 + s t2.
    std::vector<double> value(sgrid.size(), -1.0);
    std::vector<Vec> zs(sgrid.size());
    for (std::size_t i = 1; i + 1 < sgrid.size(); ++i) {
      const double s = sgrid[i];
      zs[i] = path_point(alpha.path, s);
      const double tp = (1.0 - s) * z1->t + s * z2->t;
      try {
        TimeSeparation ts = time_separation_full(model, gamma.position(tp), zs[i], guess);
        value[i] = ts.tau;
        if (ts.velocity.size() > 0 && ts.velocity.cwiseAbs().maxCoeff() > 0) guess = ts.velocity;
      } catch (const Error& e) {
        if (!resample_error(e)) throw;
      }
    }
    // Full maximization where the bound is short, weakest first, until a violation is confirmed.
    std::vector<std::size_t> order;
    for (std::size_t i = 1; i + 1 < sgrid.size(); ++i) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    int confirmed = -1;
    for (std::size_t i : order) {
      if (value[i] >= r - tolerance) break;
      value[i] = std::max(value[i], capsule_membership(gamma, zs[i]));
      if (value[i] < r - tolerance) {
        confirmed = static_cast<int>(i);
        break;
      }
    }
    if (confirmed >= 0) {
      pr.deficit = value[confirmed] - r;
      pr.s = sgrid[confirmed];
    } else {
      for (std::size_t i = 1; i + 1 < sgrid.size(); ++i) {
        if (value[i] - r < pr.deficit) {
          pr.deficit = value[i] - r;
          pr.s = sgrid[i];
        }
      }
    }
    results.push_back(pr);
  }

  double worst = std::numeric_limits<double>::infinity();
  const PairResult* witness = nullptr;
  int used = 0;
  for (const PairResult& pr : results) {
    if (!pr.used) continue;
    ++used;
    if (pr.deficit < worst) {
      worst = pr.deficit;
      witness = &pr;
    }
  }
  if (used == 0) throw Error(ErrorCode::kSamplingExhausted, "no usable capsule member pairs");
  rep.worst_deficit = worst;
  rep.pass = worst >= -tolerance;
  if (!rep.pass && witness) {
    rep.witness = {{"gamma_x", to_json(spec_in.gamma.x.front())},
                   {"gamma_v", to_json(spec_in.gamma.v.front())},
                   {"r", r},
                   {"z1", to_json(witness->z1.z)},
                   {"z2", to_json(witness->z2.z)},
                   {"t1", witness->z1.t},
                   {"t2", witness->z2.t},
                   {"s", witness->s},
                   {"pair_kind", witness->kind},
                   {"membership_deficit", witness->deficit}};
  }
  rep.details = {{"pairs_used", used}, {"pairs_skipped", skipped}, {"draws", draws}, {"tolerance", tolerance}};
  return rep;
}

ParallelReport check_parallel_L_constancy(const GeodesicPath& path, const Vec& V0, double tolerance) {
  const SpacetimeModel& m = *path.model;
  if (path.is_constant()) throw Error(ErrorCode::kPreconditionViolated, "path must be a nonconstant geodesic");
  if (!classify(m, path.x.front(), V0).future_timelike()) {
    throw Error(ErrorCode::kNotTimelike, "V0 must be future timelike");
  }
  TransportedField tf = parallel_transport(path, V0, ReferencePolicy::kTangent);
  const double L0 = m.lagrangian(path.x.front(), V0);
  ParallelReport rep;
  for (std::size_t k = 0; k < tf.t.size(); ++k) {
    if (!m.in_cone(tf.V[k])) {
      rep.max_deviation = std::numeric_limits<double>::infinity();
      break;
    }
    rep.max_deviation = std::max(rep.max_deviation, std::abs(m.lagrangian(tf.x[k], tf.V[k]) - L0));
  }
  rep.pass = rep.max_deviation <= tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Scans

CheckReport scan_flag_curvature(const ModelPtr& model, int samples, std::uint64_t seed) {
  CheckReport rep;
  rep.check = "flag-curvature";
  rep.seed = seed;
  CurvatureScan scan = curvature_scan(model, samples, Rng(seed).split("flag").seed());
  rep.worst_deficit = scan.min_K + 0.0;
  rep.pass = scan.min_K >= -1e-8;
  if (!rep.pass) {
    const FlagSample& s = scan.samples[scan.argmin];
    rep.witness = {{"x", to_json(s.x)}, {"v", to_json(s.v)}, {"w", to_json(s.w)}, {"K", s.K}};
  }
  rep.details = {{"samples", samples}, {"min_K", scan.min_K}, {"threshold", -1e-8}};
  return rep;
}

namespace {

struct PairSetup {
  GeodesicPath eta, xi;
  std::string generator;
};

GeodesicPath geodesic_on_grid(const ModelPtr& model, const Vec& x, const Vec& v, const std::vector<double>& grid) {
  GeodesicOptions o;
  o.forced = grid;
  return integrate_geodesic(model, x, v, 0.0, 1.0, o);
}

GeodesicPath bvp_on_grid(const ModelPtr& model, const Vec& a, const Vec& b, const std::vector<double>& grid) {
  BvpOptions o;
  o.forced = grid;
  return solve_bvp(model, a, b, o).path;
}

// A future timelike vector of Lorentzian length `len` at x.
Vec future_of_length(const SpacetimeModel& m, const Vec& x, Rng& rng, double len, double tilt = 0.7) {
  Vec u = sample_future_timelike(m, x, rng, tilt);
  return u * (len / std::sqrt(-2.0 * m.lagrangian(x, u)));
}

// Velocity for the first geodesic of a pair: timelike (either orientation) or arbitrary.
Vec pair_velocity(const SpacetimeModel& m, const Vec& x, Rng& rng, double len, bool timelike_only) {
  if (timelike_only || m.cone()) {
    Vec w = sample_future_timelike(m, x, rng, 0.8);
    if (rng.uniform() < 0.3) w = -w;
    return scaled_to(w, len);
  }
  return scaled_to(sample_gaussian(m.dim(), rng), len);
}

PairSetup make_pair(const ModelPtr& model, int kind, bool timelike_only, Rng& rng, const std::vector<double>& grid) {
  const SpacetimeModel& m = *model;
  const double ell = 0.35 * min_half_width(m.chart());
  PairSetup ps;
  const Vec p0 = sample_point(m.chart(), rng, 0.3);
  switch (kind) {
    case 0: {  // parallel offset: ξ starts in the future of η(0) with the transported velocity
      ps.generator = "parallel-offset";
      const Vec u = future_of_length(m, p0, rng, ell * rng.uniform(0.4, 0.8));
      GeodesicPath link = integrate_geodesic(model, p0, u, 0.0, 1.0);
      const Vec w = pair_velocity(m, p0, rng, ell * rng.uniform(0.6, 1.0), timelike_only);
      TransportedField tf = parallel_transport(link, w, ReferencePolicy::kTangent);
      ps.eta = geodesic_on_grid(model, p0, w, grid);
      ps.xi = geodesic_on_grid(model, link.x.back(), tf.V.back(), grid);
      break;
    }
    case 1: {  // random endpoints, ξ's endpoints in the future of η's
      ps.generator = "random-endpoints";
      const Vec a1 = exp_map(model, p0, pair_velocity(m, p0, rng, ell * rng.uniform(0.6, 1.0), timelike_only));
      const Vec b0 = exp_map(model, p0, future_of_length(m, p0, rng, ell * rng.uniform(0.4, 0.8)));
      const Vec b1 = exp_map(model, a1, future_of_length(m, a1, rng, ell * rng.uniform(0.4, 0.8)));
      ps.eta = bvp_on_grid(model, p0, a1, grid);
      ps.xi = bvp_on_grid(model, b0, b1, grid);
      break;
    }
    default: {  // η constant, ξ a short geodesic in the future of η
      ps.generator = "constant-curve";
      ps.eta = constant_path(model, p0);
      const Vec q = exp_map(model, p0, future_of_length(m, p0, rng, ell * rng.uniform(0.5, 0.9)));
      ps.xi = geodesic_on_grid(model, q, pair_velocity(m, q, rng, ell * rng.uniform(0.2, 0.4), false), grid);
      break;
    }
  }
  return ps;
}

nlohmann::json path_json(const GeodesicPath& p) {
  return {{"x", to_json(p.x.front())}, {"v", to_json(p.v.front())}};
}

}  // namespace

CheckReport scan_concavity(const ModelPtr& model, int pairs, int grid_size, bool timelike_only, std::uint64_t seed) {
  CheckReport rep;
  rep.check = timelike_only ? "timelike-concavity" : "concavity";
  rep.seed = seed;
  const Rng root = Rng(seed).split(rep.check);
  const std::vector<double> grid = uniform_grid(grid_size);
  struct Outcome {
    ConcavityReport report;
    PairSetup setup;
    int attempts = 0;
  };
  auto outcomes = parallel_map<Outcome>(pairs, [&](int i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    const int kind = timelike_only ? (i % 2) : (i % 3);
    for (int attempt = 1; attempt <= 200; ++attempt) {
      try {
        Outcome o;
        o.setup = make_pair(model, kind, timelike_only, rng, grid);
        o.report = check_concavity_pair(o.setup.eta, o.setup.xi, grid_size, timelike_only);
        o.attempts = attempt;
        return o;
      } catch (const Error& e) {
        if (!resample_error(e) && e.code() != ErrorCode::kPreconditionViolated) throw;
      }
    }
    throw Error(ErrorCode::kSamplingExhausted, "no admissible geodesic pair found");
  });

  double worst = std::numeric_limits<double>::infinity();
  int worst_index = -1, skipped_points = 0, failing = 0;
  for (int i = 0; i < pairs; ++i) {
    const ConcavityReport& c = outcomes[i].report;
    for (bool s : c.skipped) skipped_points += s ? 1 : 0;
    if (!c.pass) ++failing;
    // Compare slacks relative to each pair's own tolerance.
    double rel = c.worst_deficit + c.tolerance;
    if (worst_index < 0 || rel < worst + outcomes[worst_index].report.tolerance) {
      worst = c.worst_deficit;
      worst_index = i;
    }
  }
  rep.worst_deficit = worst;
  rep.pass = failing == 0;
  if (!rep.pass) {
    const Outcome& o = outcomes[worst_index];
    const ConcavityReport& c = o.report;
    rep.witness = {{"pair", worst_index},
                   {"generator", o.setup.generator},
                   {"eta", path_json(o.setup.eta)},
                   {"xi", path_json(o.setup.xi)},
                   {"t", c.grid[c.witness_index]},
                   {"test", c.witness_test},
                   {"deficit", c.worst_deficit},
                   {"tolerance", c.tolerance},
                   {"tau", c.values}};
  }
  rep.details = {{"pairs", pairs}, {"grid", grid_size}, {"failing_pairs", failing}, {"skipped_points", skipped_points}};
  return rep;
}

CheckReport scan_capsules(const ModelPtr& model, CapsuleSide side, int pairs, int s_grid, double r, std::uint64_t seed) {
  const SpacetimeModel& m = *model;
  const bool past = side == CapsuleSide::kPast;
  Rng rng = Rng(seed).split(past ? "capsule-gamma-past" : "capsule-gamma-future");
  const double ell = 0.5 * min_half_width(m.chart());
  const std::vector<double> grid = uniform_grid(33);
  for (int attempt = 0; attempt < 200; ++attempt) {
    try {
      Vec p = sample_point(m.chart(), rng, 0.2);
      // Leave room on the side where the capsule lives.
      p -= (past ? -0.5 : 0.5) * r * m.orientation(p);
      Vec gv;
      if (m.cone()) {
        gv = scaled_to(sample_future_timelike(m, p, rng, 0.5), ell);
      } else {
        gv = sample_gaussian(m.dim(), rng);
        gv(0) *= 0.2;
        gv = scaled_to(gv, ell);
      }
      CapsuleSpec spec;
      spec.gamma = geodesic_on_grid(model, p, gv, grid);
      spec.r = r;
      spec.side = side;
      spec.member_pairs = pairs;
      spec.s_grid = s_grid;
      CheckReport rep = check_capsule(model, spec, 1e-6 * (1.0 + r), seed);
      rep.details["gamma_attempts"] = attempt + 1;
      return rep;
    } catch (const Error& e) {
      if (!resample_error(e)) throw;
    }
  }
  throw Error(ErrorCode::kSamplingExhausted, "no capsule geodesic fits in the chart");
}

CheckReport scan_berwald(const ModelPtr& model, int points, int dirs, std::uint64_t seed) {
  const SpacetimeModel& m = *model;
  CheckReport rep;
  rep.check = "berwald";
  rep.seed = seed;
  Rng root = Rng(seed).split("berwald");
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_dev = 0.0;
  for (int i = 0; i < points; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    const Vec x = sample_point(m.chart(), rng, 0.9);
    const double dev = berwald_deviation(m, x, dirs, rng.split("dirs").seed());
    const Vec X = m.orientation(x);
    const double scale = connection_eval(m, x, X).chern.max_abs();
    const double slack = berwald_threshold(scale) - dev;
    worst_dev = std::max(worst_dev, dev);
    if (slack < worst_slack) {
      worst_slack = slack;
      if (slack < 0) rep.witness = {{"x", to_json(x)}, {"deviation", dev}, {"threshold", berwald_threshold(scale)}};
    }
  }
  rep.worst_deficit = worst_slack;
  rep.pass = worst_slack >= 0;
  if (rep.pass) rep.witness = nullptr;
  rep.details = {{"points", points}, {"directions", dirs}, {"max_deviation", worst_dev}};
  return rep;
}

CheckReport scan_parallel(const ModelPtr& model, int paths, double tolerance, std::uint64_t seed) {
  const SpacetimeModel& m = *model;
  CheckReport rep;
  rep.check = "parallel";
  rep.seed = seed;
  const Rng root = Rng(seed).split("parallel");
  const double ell = 0.5 * min_half_width(m.chart());
  struct Outcome {
    double deviation = 0.0;
    Vec x, v, V0;
  };
  auto out = parallel_map<Outcome>(paths, [&](int i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    for (int attempt = 0; attempt < 200; ++attempt) {
      try {
        Outcome o;
        o.x = sample_point(m.chart(), rng, 0.4);
        o.v = m.cone() ? scaled_to(sample_cone_vector(m, o.x, rng), ell) : scaled_to(sample_gaussian(m.dim(), rng), ell);
        o.V0 = sample_future_timelike(m, o.x, rng);
        GeodesicPath path = integrate_geodesic(model, o.x, o.v, 0.0, 1.0);
        o.deviation = check_parallel_L_constancy(path, o.V0, tolerance).max_deviation;
        return o;
      } catch (const Error& e) {
        if (!resample_error(e)) throw;
      }
    }
    throw Error(ErrorCode::kSamplingExhausted, "no admissible geodesic found");
  });
  double worst = 0.0;
  int wi = 0;
  for (int i = 0; i < paths; ++i) {
    if (out[i].deviation > worst) {
      worst = out[i].deviation;
      wi = i;
    }
  }
  rep.worst_deficit = tolerance - worst;
  rep.pass = worst <= tolerance;
  if (!rep.pass) {
    rep.witness = {{"x", to_json(out[wi].x)}, {"v", to_json(out[wi].v)}, {"V0", to_json(out[wi].V0)}, {"deviation", worst}};
  }
  rep.details = {{"paths", paths}, {"max_deviation", worst}, {"tolerance", tolerance}};
  return rep;
}

nlohmann::json TheoremReport::to_json() const {
  nlohmann::json j;
  j["conditions"] = nlohmann::json::array();
  for (const CheckReport& c : conditions) j["conditions"].push_back(c.to_json());
  j["berwald"] = berwald;
  j["agree"] = agree;
  j["warnings"] = warnings;
  return j;
}

TheoremReport verify_theorem(const ModelPtr& model, const TheoremBudget& b, std::uint64_t seed) {
  TheoremReport rep;
  CheckReport bw = scan_berwald(model, b.berwald_points, b.berwald_dirs, seed);
  rep.berwald = bw.pass;
  if (!rep.berwald) rep.warnings.push_back("model is not Berwald: the equivalences are not guaranteed");
  rep.conditions.push_back(scan_flag_curvature(model, b.flag_samples, seed));
  rep.conditions.push_back(scan_concavity(model, b.concavity_pairs, b.grid_size, false, seed));
  rep.conditions.push_back(scan_concavity(model, b.concavity_pairs, b.grid_size, true, seed));
  rep.conditions.push_back(scan_capsules(model, CapsuleSide::kFuture, b.capsule_pairs, b.s_grid, b.capsule_r, seed));
  rep.conditions.push_back(scan_capsules(model, CapsuleSide::kPast, b.capsule_pairs, b.s_grid, b.capsule_r, seed));
  for (const CheckReport& c : rep.conditions) rep.agree = rep.agree && (c.pass == rep.conditions.front().pass);
  return rep;
}

}  // namespace lfgeom
