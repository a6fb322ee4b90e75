#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lfgeom/types.hpp"

namespace lfgeom {

// Axis-aligned coordinate box; plays the role of the convex normal neighbourhood.
struct ChartBox {
  Vec lo;
  Vec hi;

  bool contains(const Vec& x, double slack = 1e-12) const;
  Vec center() const { return 0.5 * (lo + hi); }
  Vec half_width() const { return 0.5 * (hi - lo); }
};

// Open cone {v : (v^0)^2 > c |v_spatial|^2} on which a non-quadratic Lagrangian is certified.
struct ValidityCone {
  double c = 4.0;

  bool contains(const Vec& v) const;
};

// Multi-index of a mixed partial: counts per x-slot and per v-slot.
struct MultiIndex {
  std::array<int, kMaxDim> x{};
  std::array<int, kMaxDim> v{};

  MultiIndex& dx(int a) { ++x[a]; return *this; }
  MultiIndex& dv(int i) { ++v[i]; return *this; }
  int order_x() const;
  int order_v() const;
  int order() const { return order_x() + order_v(); }
};

inline constexpr int kMaxPartialOrder = 4;
inline constexpr int kMaxPartialOrderX = 2;

// All partials of L at (x, v) of total order <= `order` with at most two x-slots.
// Storage uses stride kMaxDim; x-slot indices come first, then v-slot indices.
struct LagrangianDerivatives {
  static constexpr int S = kMaxDim;
  int dim = 0;
  int order = 0;
  double L = 0.0;
  std::array<double, S> x{}, v{};
  std::array<double, S * S> xx{}, xv{}, vv{};
  std::array<double, S * S * S> xxv{}, xvv{}, vvv{};
  std::array<double, S * S * S * S> xxvv{}, xvvv{}, vvvv{};

  static constexpr int i2(int a, int b) { return a * S + b; }
  static constexpr int i3(int a, int b, int c) { return (a * S + b) * S + c; }
  static constexpr int i4(int a, int b, int c, int d) { return ((a * S + b) * S + c) * S + d; }

  double Lx(int a) const { return x[a]; }
  double Lv(int i) const { return v[i]; }
  double Lxx(int a, int b) const { return xx[i2(a, b)]; }
  double Lxv(int a, int i) const { return xv[i2(a, i)]; }
  double Lvv(int i, int j) const { return vv[i2(i, j)]; }
  double Lxxv(int a, int b, int i) const { return xxv[i3(a, b, i)]; }
  double Lxvv(int a, int i, int j) const { return xvv[i3(a, i, j)]; }
  double Lvvv(int i, int j, int k) const { return vvv[i3(i, j, k)]; }
  double Lxxvv(int a, int b, int i, int j) const { return xxvv[i4(a, b, i, j)]; }
  double Lxvvv(int a, int i, int j, int k) const { return xvvv[i4(a, i, j, k)]; }
  double Lvvvv(int i, int j, int k, int l) const { return vvvv[i4(i, j, k, l)]; }

  // Entry for an arbitrary admissible multi-index.
  double lookup(const MultiIndex& alpha) const;
};

// A chart-local Lorentz-Finsler structure: the Lagrangian L(x, v) plus a derivative oracle.
// Instances are immutable after construction and safe for concurrent use.
class SpacetimeModel {
 public:
  SpacetimeModel(std::string name, int dim, ChartBox chart, std::optional<ValidityCone> cone);
  virtual ~SpacetimeModel() = default;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const ChartBox& chart() const { return chart_; }
  const std::optional<ValidityCone>& cone() const { return cone_; }
  bool in_cone(const Vec& v) const { return !cone_ || cone_->contains(v); }

  // Parameter object that reproduces this model through `model_from_json`.
  const nlohmann::json& params() const { return params_; }
  void set_params(nlohmann::json p) { params_ = std::move(p); }

  // Unchecked evaluator; callers go through eval_L for validation.
  virtual double lagrangian(const Vec& x, const Vec& v) const = 0;

  // Mixed partial. The base implementation is the generic finite-difference scheme
  // (central stencils, one Richardson level).
  virtual double partial(const Vec& x, const Vec& v, const MultiIndex& alpha) const;

  // Batched partials up to `order`; the base implementation loops over partial().
  virtual void derivatives(const Vec& x, const Vec& v, int order, LagrangianDerivatives& out) const;

  // Time orientation X(x); defaults to the first coordinate direction.
  virtual Vec orientation(const Vec& x) const;

  // True when partial() is exact rather than a finite-difference estimate.
  virtual bool has_exact_partials() const { return false; }

 private:
  std::string name_;
  int dim_;
  ChartBox chart_;
  std::optional<ValidityCone> cone_;
  nlohmann::json params_;
};

using ModelPtr = std::shared_ptr<const SpacetimeModel>;

// Validated evaluation: point in chart, v != 0, v in the validity cone.
double eval_L(const SpacetimeModel& model, const Vec& x, const Vec& v);
double eval_partial(const SpacetimeModel& model, const Vec& x, const Vec& v, const MultiIndex& alpha);

// Shared precondition checks used across modules.
void require_in_chart(const SpacetimeModel& model, const Vec& x);
void require_nonzero(const Vec& v);
void require_in_cone(const SpacetimeModel& model, const Vec& v);

struct ZooParams {
  int dim = 2;
  double radius = 1.0;
  double epsilon = 0.02;
  double cone_c = 4.0;
  std::optional<Vec> chart_min;
  std::optional<Vec> chart_max;
};

const std::vector<std::string>& zoo_names();

// Built-in models: minkowski, de_sitter, product_hyperbolic, product_sphere,
// flat_finsler, perturbed_finsler.
ModelPtr zoo_model(std::string_view name, const ZooParams& params = {});

// Parses {"name", "dim", "radius", "epsilon", "cone_c", "chart_min", "chart_max"}.
ModelPtr model_from_json(const nlohmann::json& config);

// L̄(x, v) = L(x, -v) with orientation -X.
ModelPtr reverse_model(ModelPtr model);

// Black-box model: only L is supplied, partials come from finite differences.
ModelPtr function_model(std::string name, int dim, ChartBox chart,
                        std::function<double(const Vec&, const Vec&)> lagrangian,
                        std::optional<ValidityCone> cone = std::nullopt);

}  // namespace lfgeom
