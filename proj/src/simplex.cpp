#include <cmath>
#include <limits>

#include "lfgeom/errors.hpp"
#include "lfgeom/transport.hpp"

namespace lfgeom {

namespace {

constexpr double kPivotEps = 1e-11;

struct Tableau {
  Eigen::MatrixXd T;  // rows 0..m-1 constraints, row m objective; last column rhs
  std::vector<int> basis;

  int rows() const { return static_cast<int>(basis.size()); }
  int cols() const { return static_cast<int>(T.cols()) - 1; }

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i < T.rows(); ++i) {
      if (i == r) continue;
      const double f = T(i, c);
      if (f != 0.0) T.row(i) -= f * T.row(r);
    }
    basis[r] = c;
  }

  // Bland's rule: lowest-index improving column, ties in the ratio test by lowest basic index.
  void optimize(int allowed_cols) {
    const int m = rows();
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (T(m, j) < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, enter) <= kPivotEps) continue;
        const double ratio = T(i, cols()) / T(i, enter);
        if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) throw Error(ErrorCode::kInfeasible, "linear program is unbounded");
      pivot(leave, enter);
    }
    throw Error(ErrorCode::kInfeasible, "simplex iteration limit reached");
  }
};

}  // namespace

Eigen::VectorXd solve_lp(const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b_in, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A_in.rows()), n = static_cast<int>(A_in.cols());
  if (b_in.size() != m || c.size() != n) throw Error(ErrorCode::kPreconditionViolated, "lp dimension mismatch");
  Eigen::MatrixXd A = A_in;
  Eigen::VectorXd b = b_in;
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0) {
      A.row(i) *= -1.0;
      b(i) = -b(i);
    }
  }

  // Phase 1: artificial variables n..n+m-1.
  Tableau tab;
  tab.T = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  tab.T.topLeftCorner(m, n) = A;
  tab.T.block(0, n, m, m).setIdentity();
  tab.T.col(n + m).head(m) = b;
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    tab.basis[i] = n + i;
    tab.T.row(m) -= tab.T.row(i);
  }
  tab.T.block(m, n, 1, m).setZero();
  tab.optimize(n + m);
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (-tab.T(m, n + m) > 1e-9 * scale) throw Error(ErrorCode::kInfeasible, "linear program has no feasible point");

  // Drive remaining artificials out of the basis; rows where that is impossible are redundant.
  for (int i = 0; i < tab.rows(); ++i) {
    if (tab.basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.T(i, j)) > kPivotEps) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
    } else {
      Eigen::MatrixXd T(tab.T.rows() - 1, tab.T.cols());
      int r = 0;
      for (int k = 0; k < tab.T.rows(); ++k)
        if (k != i) T.row(r++) = tab.T.row(k);
      tab.T = T;
      tab.basis.erase(tab.basis.begin() + i);
      --i;
    }
  }

  // Phase 2 on the original columns.
  const int mr = tab.rows();
  Eigen::MatrixXd T2(mr + 1, n + 1);
  T2.topLeftCorner(mr, n) = tab.T.topLeftCorner(mr, n);
  T2.col(n).head(mr) = tab.T.col(n + m).head(mr);
  T2.row(mr).head(n) = c.transpose();
  T2(mr, n) = 0.0;
  tab.T = T2;
  for (int i = 0; i < mr; ++i) {
    const double f = tab.T(mr, tab.basis[i]);
    if (f != 0.0) tab.T.row(mr) -= f * tab.T.row(i);
  }
  tab.optimize(n);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < mr; ++i) x(tab.basis[i]) = std::max(0.0, tab.T(i, n));
  return x;
}

Eigen::MatrixXd optimal_coupling_lp(const Eigen::MatrixXd& cost, const std::vector<double>& a,
                                    const std::vector<double>& b) {
  const int m = static_cast<int>(cost.rows()), n = static_cast<int>(cost.cols());
  if (static_cast<int>(a.size()) != m || static_cast<int>(b.size()) != n) {
    throw Error(ErrorCode::kPreconditionViolated, "marginals do not match the cost matrix");
  }
  // Variable (i, j) sits at i*n + j.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + n, m * n);
  Eigen::VectorXd rhs(m + n), c(m * n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      A(i, i * n + j) = 1.0;
      A(m + j, i * n + j) = 1.0;
      c(i * n + j) = cost(i, j);
    }
    rhs(i) = a[i];
  }
  for (int j = 0; j < n; ++j) rhs(m + j) = b[j];
  Eigen::VectorXd x = solve_lp(A, rhs, c);
  Eigen::MatrixXd pi(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) pi(i, j) = x(i * n + j) < 1e-14 ? 0.0 : x(i * n + j);
  return pi;
}

}  // namespace lfgeom
