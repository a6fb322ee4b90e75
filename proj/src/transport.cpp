#include "lfgeom/transport.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <gsl/gsl_multimin.h>

#include "lfgeom/errors.hpp"
#include "lfgeom/parallel.hpp"

namespace lfgeom {

double GroundSpace::distance(const Point& x, const Point& y) const {
  if (norm == NormKind::kEuclidean) return (x - y).norm();
  return std::pow((x - y).cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

GroundSpace euclidean_space(int dim) { return GroundSpace{dim, NormKind::kEuclidean, 2.0}; }

GroundSpace p_norm_space(int dim, double p) { return GroundSpace{dim, NormKind::kPNorm, p}; }

void validate(const GroundSpace& space) {
  if (space.dim < 1) throw Error(ErrorCode::kInvalidParams, "ground space dimension must be positive");
  if (space.norm == NormKind::kPNorm && !(space.p > 1.0 && std::isfinite(space.p))) {
    throw Error(ErrorCode::kInvalidParams, "p-norm needs 1 < p < infinity");
  }
}

void validate(const GroundSpace& space, const DiscreteMeasure& mu) {
  validate(space);
  if (mu.atoms.empty() || mu.atoms.size() != mu.weights.size()) {
    throw Error(ErrorCode::kInvalidMeasure, "measure needs one weight per atom and at least one atom");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    if (mu.atoms[i].size() != space.dim || !mu.atoms[i].allFinite()) {
      throw Error(ErrorCode::kInvalidMeasure, "atom " + std::to_string(i) + " has the wrong dimension or is not finite");
    }
    if (!(mu.weights[i] >= 0.0)) throw Error(ErrorCode::kInvalidMeasure, "weights must be nonnegative");
    total += mu.weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::kInvalidMeasure, "weights must sum to 1");
}

DiscreteMeasure uniform_measure(std::vector<Point> atoms) {
  DiscreteMeasure mu;
  mu.weights.assign(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
  mu.atoms = std::move(atoms);
  return mu;
}

Eigen::MatrixXd squared_cost(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  Eigen::MatrixXd C(mu.atoms.size(), nu.atoms.size());
  for (std::size_t i = 0; i < mu.atoms.size(); ++i)
    for (std::size_t j = 0; j < nu.atoms.size(); ++j) {
      const double d = space.distance(mu.atoms[i], nu.atoms[j]);
      C(i, j) = d * d;
    }
  return C;
}

namespace {

bool uniform_equal_size(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.atoms.size() != nu.atoms.size()) return false;
  const double w = 1.0 / static_cast<double>(mu.atoms.size());
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    if (std::abs(mu.weights[i] - w) > 1e-15 || std::abs(nu.weights[i] - w) > 1e-15) return false;
  }
  return true;
}

}  // namespace

TransportPlan w2_distance(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          CouplingSolver solver) {
  validate(space, mu);
  validate(space, nu);
  const Eigen::MatrixXd C = squared_cost(space, mu, nu);
  TransportPlan plan;
  const bool assignment = solver == CouplingSolver::kAssignment ||
                          (solver == CouplingSolver::kAuto && uniform_equal_size(mu, nu));
  if (assignment) {
    if (!uniform_equal_size(mu, nu)) {
      throw Error(ErrorCode::kPreconditionViolated, "assignment solver needs equal-size uniform measures");
    }
    const std::vector<int> match = optimal_assignment(C);
    const int m = static_cast<int>(match.size());
    plan.coupling = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) plan.coupling(i, match[i]) = 1.0 / m;
  } else {
    plan.coupling = optimal_coupling_lp(C, mu.weights, nu.weights);
  }
  plan.distance = std::sqrt(std::max(0.0, (plan.coupling.array() * C.array()).sum()));
  return plan;
}

DiscreteMeasure w2_geodesic(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const TransportPlan& plan, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::kPreconditionViolated, "t must lie in [0, 1]");
  if (plan.coupling.rows() != static_cast<int>(mu.atoms.size()) ||
      plan.coupling.cols() != static_cast<int>(nu.atoms.size())) {
    throw Error(ErrorCode::kPreconditionViolated, "coupling does not match the measures");
  }
  (void)space;
  DiscreteMeasure out;
  double total = 0.0;
  for (int i = 0; i < plan.coupling.rows(); ++i)
    for (int j = 0; j < plan.coupling.cols(); ++j) {
      const double w = plan.coupling(i, j);
      if (w <= 1e-15) continue;
      out.atoms.push_back((1.0 - t) * mu.atoms[i] + t * nu.atoms[j]);
      out.weights.push_back(w);
      total += w;
    }
  for (double& w : out.weights) w /= total;
  return out;
}

DiscreteMeasure w2_geodesic(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t) {
  return w2_geodesic(space, mu, nu, w2_distance(space, mu, nu), t);
}

namespace {

struct Objective {
  const GroundSpace* space;
  const DiscreteMeasure* mu;

  double operator()(const Point& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < mu->atoms.size(); ++i) {
      const double d = space->distance(x, mu->atoms[i]);
      s += mu->weights[i] * d * d;
    }
    return s;
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  const Objective& f = *static_cast<const Objective*>(params);
  Point x(static_cast<int>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) x(static_cast<int>(i)) = gsl_vector_get(v, i);
  return f(x);
}

// One Nelder-Mead run from x0; returns the best vertex.
Point nelder_mead(const Objective& f, const Point& x0, double step) {
  const std::size_t n = static_cast<std::size_t>(x0.size());
  gsl_multimin_function fn{&gsl_objective, n, const_cast<Objective*>(&f)};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0(static_cast<int>(i)));
  gsl_vector_set_all(ss, step);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  for (int iter = 0; iter < 20000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s)) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-12) == GSL_SUCCESS) break;
  }
  Point out(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) out(static_cast<int>(i)) = gsl_vector_get(s->x, i);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return out;
}

}  // namespace

Variance variance(const GroundSpace& space, const DiscreteMeasure& mu) {
  validate(space, mu);
  Point mean = Point::Zero(space.dim);
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) mean += mu.weights[i] * mu.atoms[i];
  const Objective f{&space, &mu};
  Variance out;
  if (space.norm == NormKind::kEuclidean) {
    out.barycenter = mean;
    out.value = f(mean);
    return out;
  }
  double spread = 0.0;
  for (const Point& a : mu.atoms) spread = std::max(spread, (a - mean).cwiseAbs().maxCoeff());
  if (spread == 0.0) return Variance{0.0, mean};
  // Restart from the best vertex with a shrinking simplex until the objective settles.
  Point x = mean;
  double fx = f(x), step = 0.5 * spread;
  double last_gain = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 4; ++restart) {
    Point y = nelder_mead(f, x, step);
    const double fy = f(y);
    last_gain = fx - fy;
    if (fy <= fx) {
      x = y;
      fx = fy;
    }
    if (restart > 0 && last_gain <= 1e-9 * (1.0 + fx)) break;
    step *= 0.1;
  }
  if (last_gain > 1e-9 * (1.0 + fx)) {
    throw Error(ErrorCode::kOptimizerStall, "variance optimizer still improving; best value " + std::to_string(fx));
  }
  out.barycenter = x;
  out.value = fx;
  return out;
}

SqrtVarReport check_sqrt_var_convexity(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       int grid_size, double threshold) {
  if (grid_size < 3) throw Error(ErrorCode::kPreconditionViolated, "grid needs at least three points");
  const TransportPlan plan = w2_distance(space, mu, nu);
  SqrtVarReport rep;
  rep.threshold = threshold;
  rep.grid.resize(grid_size);
  for (int i = 0; i < grid_size; ++i) rep.grid[i] = static_cast<double>(i) / (grid_size - 1);
  rep.sqrt_var = parallel_map<double>(grid_size, [&](int i) {
    return std::sqrt(variance(space, w2_geodesic(space, mu, nu, plan, rep.grid[i])).value);
  });
  rep.worst_deficit = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < grid_size; ++i) {
    const double d = 0.5 * (rep.sqrt_var[i - 1] + rep.sqrt_var[i + 1]) - rep.sqrt_var[i];
    if (d < rep.worst_deficit) {
      rep.worst_deficit = d;
      rep.witness_index = i;
    }
  }
  rep.pass = rep.worst_deficit >= -threshold;
  return rep;
}

}  // namespace lfgeom
