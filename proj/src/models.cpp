#include "lfgeom/models.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "lfgeom/errors.hpp"

namespace lfgeom {

bool ChartBox::contains(const Vec& x, double slack) const {
  if (x.size() != lo.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (!(x(i) >= lo(i) - slack && x(i) <= hi(i) + slack)) return false;
  }
  return true;
}

bool ValidityCone::contains(const Vec& v) const {
  double spatial = v.tail(v.size() - 1).squaredNorm();
  return v(0) * v(0) > c * spatial;
}

int MultiIndex::order_x() const {
  int s = 0;
  for (int k : x) s += k;
  return s;
}

int MultiIndex::order_v() const {
  int s = 0;
  for (int k : v) s += k;
  return s;
}

double LagrangianDerivatives::lookup(const MultiIndex& alpha) const {
  std::array<int, 4> xs{}, vs{};
  int nx = 0, nv = 0;
  for (int a = 0; a < kMaxDim; ++a) {
    for (int r = 0; r < alpha.x[a]; ++r) xs[nx++] = a;
    for (int r = 0; r < alpha.v[a]; ++r) vs[nv++] = a;
  }
  switch (nx * 10 + nv) {
    case 0: return L;
    case 1: return Lv(vs[0]);
    case 2: return Lvv(vs[0], vs[1]);
    case 3: return Lvvv(vs[0], vs[1], vs[2]);
    case 4: return Lvvvv(vs[0], vs[1], vs[2], vs[3]);
    case 10: return Lx(xs[0]);
    case 11: return Lxv(xs[0], vs[0]);
    case 12: return Lxvv(xs[0], vs[0], vs[1]);
    case 13: return Lxvvv(xs[0], vs[0], vs[1], vs[2]);
    case 20: return Lxx(xs[0], xs[1]);
    case 21: return Lxxv(xs[0], xs[1], vs[0]);
    case 22: return Lxxvv(xs[0], xs[1], vs[0], vs[1]);
    default:
      throw Error(ErrorCode::kOrderExceeded, "multi-index outside the derivative table");
  }
}

SpacetimeModel::SpacetimeModel(std::string name, int dim, ChartBox chart,
                               std::optional<ValidityCone> cone)
    : name_(std::move(name)), dim_(dim), chart_(std::move(chart)), cone_(cone) {
  if (dim_ < 2 || dim_ > kMaxDim) {
    throw Error(ErrorCode::kInvalidParams, "dimension must lie in [2, " + std::to_string(kMaxDim) + "]");
  }
  if (chart_.lo.size() != dim_ || chart_.hi.size() != dim_ || ((chart_.hi - chart_.lo).array() <= 0).any()) {
    throw Error(ErrorCode::kInvalidParams, "chart box does not match the dimension or is empty");
  }
}

namespace {

// Central stencil for the k-th derivative, second-order accurate.
struct Stencil {
  std::array<int, 5> offsets{};
  std::array<double, 5> weights{};
  int size = 0;
};

Stencil central_stencil(int k) {
  switch (k) {
    case 1: return {{-1, 1}, {-0.5, 0.5}, 2};
    case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}, 3};
    case 3: return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}, 4};
    case 4: return {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}, 5};
    default: return {{0}, {1.0}, 1};
  }
}

double stencil_estimate(const SpacetimeModel& model, const Vec& x, const Vec& v,
                        const MultiIndex& alpha, double base) {
  const int n = model.dim();
  struct Slot {
    bool is_x;
    int index;
    double step;
    Stencil st;
    int k;
  };
  std::vector<Slot> slots;
  for (int a = 0; a < n; ++a) {
    if (alpha.x[a] > 0) slots.push_back({true, a, base * (1.0 + std::abs(x(a))), central_stencil(alpha.x[a]), alpha.x[a]});
    if (alpha.v[a] > 0) slots.push_back({false, a, base * (1.0 + std::abs(v(a))), central_stencil(alpha.v[a]), alpha.v[a]});
  }
  if (slots.empty()) return model.lagrangian(x, v);

  std::vector<int> cursor(slots.size(), 0);
  double sum = 0.0;
  while (true) {
    Vec xs = x, vs = v;
    double w = 1.0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const Slot& sl = slots[s];
      double off = sl.st.offsets[cursor[s]] * sl.step;
      (sl.is_x ? xs : vs)(sl.index) += off;
      w *= sl.st.weights[cursor[s]];
    }
    sum += w * model.lagrangian(xs, vs);
    std::size_t s = 0;
    while (s < slots.size() && ++cursor[s] == slots[s].st.size) cursor[s++] = 0;
    if (s == slots.size()) break;
  }
  double scale = 1.0;
  for (const Slot& sl : slots) scale *= std::pow(sl.step, sl.k);
  return sum / scale;
}

}  // namespace

double SpacetimeModel::partial(const Vec& x, const Vec& v, const MultiIndex& alpha) const {
  const int k = alpha.order();
  if (k == 0) return lagrangian(x, v);
  // Base step 1e-3 (relative to 1 + |component|), widened for orders >= 2 so that
  // the Richardson-extrapolated estimate is not dominated by cancellation.
  const double eps = std::numeric_limits<double>::epsilon();
  const double base = std::max(1e-3, std::pow(eps, 1.0 / (k + 4)));
  double coarse = stencil_estimate(*this, x, v, alpha, base);
  double fine = stencil_estimate(*this, x, v, alpha, 0.5 * base);
  return (4.0 * fine - coarse) / 3.0;
}

void SpacetimeModel::derivatives(const Vec& x, const Vec& v, int order, LagrangianDerivatives& d) const {
  using D = LagrangianDerivatives;
  const int n = dim_;
  d.dim = n;
  d.order = order;
  auto mi = [](std::initializer_list<int> xs, std::initializer_list<int> vs) {
    MultiIndex m;
    for (int a : xs) m.dx(a);
    for (int i : vs) m.dv(i);
    return m;
  };
  d.L = lagrangian(x, v);
  if (order >= 1) {
    for (int a = 0; a < n; ++a) {
      d.x[a] = partial(x, v, mi({a}, {}));
      d.v[a] = partial(x, v, mi({}, {a}));
    }
  }
  if (order >= 2) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        d.xx[D::i2(a, b)] = partial(x, v, mi({a, b}, {}));
        d.xv[D::i2(a, b)] = partial(x, v, mi({a}, {b}));
        d.vv[D::i2(a, b)] = partial(x, v, mi({}, {a, b}));
      }
  }
  if (order >= 3) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          d.xxv[D::i3(a, b, c)] = partial(x, v, mi({a, b}, {c}));
          d.xvv[D::i3(a, b, c)] = partial(x, v, mi({a}, {b, c}));
          d.vvv[D::i3(a, b, c)] = partial(x, v, mi({}, {a, b, c}));
        }
  }
  if (order >= 4) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int e = 0; e < n; ++e) {
            d.xxvv[D::i4(a, b, c, e)] = partial(x, v, mi({a, b}, {c, e}));
            d.xvvv[D::i4(a, b, c, e)] = partial(x, v, mi({a}, {b, c, e}));
            d.vvvv[D::i4(a, b, c, e)] = partial(x, v, mi({}, {a, b, c, e}));
          }
  }
}

Vec SpacetimeModel::orientation(const Vec& /*x*/) const { return unit_vector(dim_, 0); }

void require_in_chart(const SpacetimeModel& model, const Vec& x) {
  if (x.size() != model.dim()) {
    throw Error(ErrorCode::kPreconditionViolated, "point has wrong dimension");
  }
  if (!model.chart().contains(x)) {
    throw Error(ErrorCode::kPointOutsideChart, "point lies outside the chart box");
  }
}

void require_nonzero(const Vec& v) {
  if (v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::kZeroVector, "vector must be nonzero");
  }
}

void require_in_cone(const SpacetimeModel& model, const Vec& v) {
  if (!model.in_cone(v)) {
    throw Error(ErrorCode::kOutsideValidityCone, "direction lies outside the validity cone");
  }
}

double eval_L(const SpacetimeModel& model, const Vec& x, const Vec& v) {
  require_in_chart(model, x);
  if (v.size() != model.dim()) throw Error(ErrorCode::kPreconditionViolated, "vector has wrong dimension");
  require_nonzero(v);
  require_in_cone(model, v);
  double value = model.lagrangian(x, v);
  if (!std::isfinite(value)) throw Error(ErrorCode::kOracleFailure, "non-finite Lagrangian value");
  return value;
}

double eval_partial(const SpacetimeModel& model, const Vec& x, const Vec& v, const MultiIndex& alpha) {
  if (alpha.order() > kMaxPartialOrder || alpha.order_x() > kMaxPartialOrderX) {
    throw Error(ErrorCode::kOrderExceeded, "at most order 4 with two x-derivatives is supported");
  }
  for (int a = model.dim(); a < kMaxDim; ++a) {
    if (alpha.x[a] != 0 || alpha.v[a] != 0) throw Error(ErrorCode::kPreconditionViolated, "slot beyond dimension");
  }
  require_in_chart(model, x);
  require_nonzero(v);
  require_in_cone(model, v);
  double value = model.partial(x, v, alpha);
  if (!std::isfinite(value)) throw Error(ErrorCode::kOracleFailure, "non-finite partial derivative");
  return value;
}

namespace {

class ReversedModel final : public SpacetimeModel {
 public:
  explicit ReversedModel(ModelPtr inner)
      : SpacetimeModel(inner->name(), inner->dim(), inner->chart(), inner->cone()), inner_(std::move(inner)) {
    nlohmann::json p = inner_->params();
    p["reversed"] = true;
    set_params(std::move(p));
  }

  const ModelPtr& inner() const { return inner_; }

  double lagrangian(const Vec& x, const Vec& v) const override { return inner_->lagrangian(x, -v); }

  double partial(const Vec& x, const Vec& v, const MultiIndex& alpha) const override {
    double sign = (alpha.order_v() % 2 == 0) ? 1.0 : -1.0;
    return sign * inner_->partial(x, -v, alpha);
  }

  void derivatives(const Vec& x, const Vec& v, int order, LagrangianDerivatives& d) const override {
    inner_->derivatives(x, -v, order, d);
    // Odd numbers of v-slots flip sign.
    for (auto& e : d.v) e = -e;
    for (auto& e : d.xv) e = -e;
    for (auto& e : d.xxv) e = -e;
    for (auto& e : d.vvv) e = -e;
    for (auto& e : d.xvvv) e = -e;
  }

  Vec orientation(const Vec& x) const override { return -inner_->orientation(x); }
  bool has_exact_partials() const override { return inner_->has_exact_partials(); }

 private:
  ModelPtr inner_;
};

class FunctionModel final : public SpacetimeModel {
 public:
  FunctionModel(std::string name, int dim, ChartBox chart,
                std::function<double(const Vec&, const Vec&)> lagrangian, std::optional<ValidityCone> cone)
      : SpacetimeModel(std::move(name), dim, std::move(chart), cone), fn_(std::move(lagrangian)) {}

  double lagrangian(const Vec& x, const Vec& v) const override { return fn_(x, v); }

 private:
  std::function<double(const Vec&, const Vec&)> fn_;
};

}  // namespace

ModelPtr reverse_model(ModelPtr model) {
  if (auto* rev = dynamic_cast<const ReversedModel*>(model.get())) return rev->inner();
  return std::make_shared<ReversedModel>(std::move(model));
}

ModelPtr function_model(std::string name, int dim, ChartBox chart,
                        std::function<double(const Vec&, const Vec&)> lagrangian,
                        std::optional<ValidityCone> cone) {
  return std::make_shared<FunctionModel>(std::move(name), dim, std::move(chart), std::move(lagrangian), cone);
}

}  // namespace lfgeom
