#pragma once

#include <vector>

#include <Eigen/Dense>

namespace lfgeom {

using Point = Eigen::VectorXd;

struct DiscreteMeasure {
  std::vector<Point> atoms;
  std::vector<double> weights;
};

enum class NormKind { kEuclidean, kPNorm };

struct GroundSpace {
  int dim = 2;
  NormKind norm = NormKind::kEuclidean;
  double p = 2.0;

  double distance(const Point& x, const Point& y) const;
};

GroundSpace euclidean_space(int dim);
GroundSpace p_norm_space(int dim, double p);

// Throws invalid-measure / invalid-params.
void validate(const GroundSpace& space);
void validate(const GroundSpace& space, const DiscreteMeasure& mu);

DiscreteMeasure uniform_measure(std::vector<Point> atoms);

// Minimum-cost perfect matching on a square cost matrix; result[i] is the column for row i.
std::vector<int> optimal_assignment(const Eigen::MatrixXd& cost);

// Exact transportation LP: min <C, pi> subject to row sums a, column sums b, pi >= 0.
Eigen::MatrixXd optimal_coupling_lp(const Eigen::MatrixXd& cost, const std::vector<double>& a,
                                    const std::vector<double>& b);

// min c.x subject to A x = b, x >= 0. Two-phase primal simplex with Bland's rule.
Eigen::VectorXd solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

struct TransportPlan {
  double distance = 0.0;
  Eigen::MatrixXd coupling;
};

Eigen::MatrixXd squared_cost(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

enum class CouplingSolver { kAuto, kAssignment, kLinearProgram };

TransportPlan w2_distance(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          CouplingSolver solver = CouplingSolver::kAuto);

DiscreteMeasure w2_geodesic(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const TransportPlan& plan, double t);
DiscreteMeasure w2_geodesic(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t);

struct Variance {
  double value = 0.0;
  Point barycenter;
};

Variance variance(const GroundSpace& space, const DiscreteMeasure& mu);

struct SqrtVarReport {
  std::vector<double> grid;
  std::vector<double> sqrt_var;
  double worst_deficit = 0.0;
  int witness_index = -1;
  double threshold = 1e-7;
  bool pass = true;
};

SqrtVarReport check_sqrt_var_convexity(const GroundSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       int grid_size, double threshold = 1e-7);

}  // namespace lfgeom
