#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace lfgeom {

// Chart-local geometry never needs more than a 4-dimensional spacetime.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// Dense rank-3 array T(i, j, k) with fixed stride kMaxDim.
struct Tensor3 {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> a{};

  Tensor3() = default;
  explicit Tensor3(int dim) : n(dim) {}

  double& operator()(int i, int j, int k) { return a[(i * kMaxDim + j) * kMaxDim + k]; }
  double operator()(int i, int j, int k) const { return a[(i * kMaxDim + j) * kMaxDim + k]; }

  double max_abs() const;
  double max_abs_diff(const Tensor3& other) const;
};

inline Vec unit_vector(int n, int i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

}  // namespace lfgeom
