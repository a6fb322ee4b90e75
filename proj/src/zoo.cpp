#include <algorithm>
#include <cmath>
#include <random>

#include "lfgeom/errors.hpp"
#include "lfgeom/models.hpp"

namespace lfgeom {

namespace {

enum class Kind { kMinkowski, kDeSitter, kProductHyperbolic, kProductSphere, kFlatFinsler, kPerturbedFinsler };

struct MetricJet {
  Mat g;
  std::array<Mat, kMaxDim> dg;                          // dg[a] = d g / d x^a
  std::array<std::array<Mat, kMaxDim>, kMaxDim> d2g;    // d2g[a][b]
};

// Falling factorial p (p-1) ... (p-k+1).
double falling(double p, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (p - i);
  return r;
}

// L(x, v) = ½ g_ij(x) v^i v^j + φ(x) (v^1)^4 / (v^0)^2, with closed-form partials.
class ZooModel final : public SpacetimeModel {
 public:
  ZooModel(Kind kind, std::string name, int dim, ChartBox chart, std::optional<ValidityCone> cone,
           double radius, double epsilon)
      : SpacetimeModel(std::move(name), dim, std::move(chart), cone), kind_(kind), radius_(radius), eps_(epsilon) {}

  bool has_exact_partials() const override { return true; }

  double lagrangian(const Vec& x, const Vec& v) const override {
    MetricJet m;
    metric(x, 0, m);
    double value = 0.5 * v.dot(m.g * v);
    if (has_finsler_term()) value += phi(x) * psi(v, 0, 0);
    return value;
  }

  double partial(const Vec& x, const Vec& v, const MultiIndex& alpha) const override {
    LagrangianDerivatives d;
    derivatives(x, v, alpha.order(), d);
    return d.lookup(alpha);
  }

  void derivatives(const Vec& x, const Vec& v, int order, LagrangianDerivatives& d) const override {
    using D = LagrangianDerivatives;
    const int n = dim();
    d.dim = n;
    d.order = order;
    MetricJet m;
    metric(x, std::min(order, 2), m);

    const Vec gv = m.g * v;
    d.L = 0.5 * v.dot(gv);
    if (order >= 1) {
      for (int a = 0; a < n; ++a) {
        d.x[a] = 0.5 * v.dot(m.dg[a] * v);
        d.v[a] = gv(a);
      }
    }
    if (order >= 2) {
      for (int a = 0; a < n; ++a) {
        const Vec dgv = m.dg[a] * v;
        for (int b = 0; b < n; ++b) {
          d.xx[D::i2(a, b)] = 0.5 * v.dot(m.d2g[a][b] * v);
          d.xv[D::i2(a, b)] = dgv(b);
          d.vv[D::i2(a, b)] = m.g(a, b);
        }
      }
    }
    if (order >= 3) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const Vec d2gv = m.d2g[a][b] * v;
          for (int c = 0; c < n; ++c) {
            d.xxv[D::i3(a, b, c)] = d2gv(c);
            d.xvv[D::i3(a, b, c)] = m.dg[a](b, c);
            d.vvv[D::i3(a, b, c)] = 0.0;
          }
        }
    }
    if (order >= 4) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int e = 0; e < n; ++e) {
              d.xxvv[D::i4(a, b, c, e)] = m.d2g[a][b](c, e);
              d.xvvv[D::i4(a, b, c, e)] = 0.0;
              d.vvvv[D::i4(a, b, c, e)] = 0.0;
            }
    }
    if (has_finsler_term()) add_finsler_term(x, v, order, d);
  }

 private:
  bool has_finsler_term() const {
    return (kind_ == Kind::kFlatFinsler || kind_ == Kind::kPerturbedFinsler) && eps_ != 0.0;
  }

  double phi(const Vec& x) const {
    return kind_ == Kind::kPerturbedFinsler ? eps_ * (1.0 + x(1)) : eps_;
  }
  double dphi(int a) const { return (kind_ == Kind::kPerturbedFinsler && a == 1) ? eps_ : 0.0; }

  // ∂^(b0, b1) of (v^1)^4 (v^0)^-2; derivatives in other v-slots vanish.
  static double psi(const Vec& v, int b0, int b1) {
    if (b1 > 4) return 0.0;
    return falling(-2.0, b0) * std::pow(v(0), -2 - b0) * falling(4.0, b1) * std::pow(v(1), 4 - b1);
  }

  template <typename... I>
  static double psi_at(const Vec& v, I... idx) {
    int b0 = 0, b1 = 0;
    for (int i : {idx...}) {
      if (i == 0) ++b0;
      else if (i == 1) ++b1;
      else return 0.0;
    }
    return psi(v, b0, b1);
  }

  void add_finsler_term(const Vec& x, const Vec& v, int order, LagrangianDerivatives& d) const {
    using D = LagrangianDerivatives;
    const int n = dim();
    const double f = phi(x);
    d.L += f * psi(v, 0, 0);
    if (order >= 1)
      for (int a = 0; a < n; ++a) {
        d.x[a] += dphi(a) * psi(v, 0, 0);
        d.v[a] += f * psi_at(v, a);
      }
    if (order >= 2)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          d.xv[D::i2(a, b)] += dphi(a) * psi_at(v, b);
          d.vv[D::i2(a, b)] += f * psi_at(v, a, b);
        }
    if (order >= 3)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            d.xvv[D::i3(a, b, c)] += dphi(a) * psi_at(v, b, c);
            d.vvv[D::i3(a, b, c)] += f * psi_at(v, a, b, c);
          }
    if (order >= 4)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int e = 0; e < n; ++e) {
              d.xvvv[D::i4(a, b, c, e)] += dphi(a) * psi_at(v, b, c, e);
              d.vvvv[D::i4(a, b, c, e)] += f * psi_at(v, a, b, c, e);
            }
  }

  // Quadratic part g(x) with x-derivatives up to `xorder`.
  void metric(const Vec& x, int xorder, MetricJet& m) const {
    const int n = dim();
    m.g = Mat::Zero(n, n);
    if (xorder >= 1)
      for (int a = 0; a < n; ++a) m.dg[a] = Mat::Zero(n, n);
    if (xorder >= 2)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) m.d2g[a][b] = Mat::Zero(n, n);

    switch (kind_) {
      case Kind::kMinkowski:
      case Kind::kFlatFinsler:
      case Kind::kPerturbedFinsler:
        m.g(0, 0) = -1.0;
        for (int i = 1; i < n; ++i) m.g(i, i) = 1.0;
        return;
      case Kind::kDeSitter:
        de_sitter_metric(x, xorder, m);
        return;
      case Kind::kProductHyperbolic:
        conformal_product_metric(x, xorder, +1.0, m);
        return;
      case Kind::kProductSphere:
        conformal_product_metric(x, xorder, -1.0, m);
        return;
    }
  }

  // Static patch in Cartesian spatial coordinates:
  //   -(1 - |y|²/R²) dt² + (δ_ab + y_a y_b / (R² - |y|²)) dy^a dy^b.
  void de_sitter_metric(const Vec& x, int xorder, MetricJet& m) const {
    const int n = dim();
    const double R2 = radius_ * radius_;
    const Vec y = x.tail(n - 1);
    const double s = y.squaredNorm();
    const double q = 1.0 / (R2 - s);
    m.g(0, 0) = -(1.0 - s / R2);
    for (int a = 1; a < n; ++a)
      for (int b = 1; b < n; ++b) m.g(a, b) = (a == b ? 1.0 : 0.0) + y(a - 1) * y(b - 1) * q;
    if (xorder < 1) return;

    auto yy = [&](int i) { return y(i - 1); };
    auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };
    auto dq = [&](int c) { return 2.0 * yy(c) * q * q; };
    for (int c = 1; c < n; ++c) {
      m.dg[c](0, 0) = 2.0 * yy(c) / R2;
      for (int a = 1; a < n; ++a)
        for (int b = 1; b < n; ++b)
          m.dg[c](a, b) = (delta(a, c) * yy(b) + delta(b, c) * yy(a)) * q + yy(a) * yy(b) * dq(c);
    }
    if (xorder < 2) return;
    for (int c = 1; c < n; ++c)
      for (int e = 1; e < n; ++e) {
        const double d2q = 2.0 * delta(c, e) * q * q + 8.0 * yy(c) * yy(e) * q * q * q;
        m.d2g[c][e](0, 0) = 2.0 * delta(c, e) / R2;
        for (int a = 1; a < n; ++a)
          for (int b = 1; b < n; ++b)
            m.d2g[c][e](a, b) = (delta(a, c) * delta(b, e) + delta(b, c) * delta(a, e)) * q +
                                (delta(a, c) * yy(b) + delta(b, c) * yy(a)) * dq(e) +
                                (delta(a, e) * yy(b) + delta(b, e) * yy(a)) * dq(c) + yy(a) * yy(b) * d2q;
      }
  }

  // -dt² + ψ(y)|dy|², ψ = (1 - k|y|²/(4R²))^-2: k = +1 hyperbolic, k = -1 round sphere,
  // both of sectional curvature ∓1/R² and normalised to the identity at y = 0.
  void conformal_product_metric(const Vec& x, int xorder, double k, MetricJet& m) const {
    const int n = dim();
    const double a = k / (4.0 * radius_ * radius_);
    const Vec y = x.tail(n - 1);
    const double u = 1.0 - a * y.squaredNorm();
    const double psi = 1.0 / (u * u);
    m.g(0, 0) = -1.0;
    for (int i = 1; i < n; ++i) m.g(i, i) = psi;
    if (xorder < 1) return;
    for (int c = 1; c < n; ++c) {
      const double dpsi = 4.0 * a * y(c - 1) / (u * u * u);
      for (int i = 1; i < n; ++i) m.dg[c](i, i) = dpsi;
    }
    if (xorder < 2) return;
    for (int c = 1; c < n; ++c)
      for (int e = 1; e < n; ++e) {
        const double d2psi = 4.0 * a * (c == e ? 1.0 : 0.0) / (u * u * u) +
                             24.0 * a * a * y(c - 1) * y(e - 1) / (u * u * u * u);
        for (int i = 1; i < n; ++i) m.d2g[c][e](i, i) = d2psi;
      }
  }

  Kind kind_;
  double radius_;
  double eps_;
};

struct KindInfo {
  const char* name;
  Kind kind;
  int default_dim;
};

constexpr KindInfo kKinds[] = {
    {"minkowski", Kind::kMinkowski, 2},
    {"de_sitter", Kind::kDeSitter, 2},
    {"product_hyperbolic", Kind::kProductHyperbolic, 3},
    {"product_sphere", Kind::kProductSphere, 3},
    {"flat_finsler", Kind::kFlatFinsler, 2},
    {"perturbed_finsler", Kind::kPerturbedFinsler, 2},
};

ChartBox default_chart(Kind kind, int n, double R) {
  Vec lo(n), hi(n);
  double t_half = 3.0, y_half = 3.0;
  switch (kind) {
    case Kind::kMinkowski:
    case Kind::kFlatFinsler: break;
    case Kind::kPerturbedFinsler: t_half = y_half = 1.0; break;
    case Kind::kDeSitter: t_half = R; y_half = 0.45 * R; break;
    case Kind::kProductHyperbolic:
    case Kind::kProductSphere: t_half = 1.5 * R; y_half = 0.8 * R; break;
  }
  lo(0) = -t_half;
  hi(0) = t_half;
  for (int i = 1; i < n; ++i) {
    lo(i) = -y_half;
    hi(i) = y_half;
  }
  return {lo, hi};
}

// Largest |y| over the spatial face of the box.
double max_spatial_radius(const ChartBox& box) {
  double s = 0.0;
  for (int i = 1; i < box.lo.size(); ++i) {
    double m = std::max(std::abs(box.lo(i)), std::abs(box.hi(i)));
    s += m * m;
  }
  return std::sqrt(s);
}

// Samples the chart and cone to certify Lorentz signature and a timelike orientation.
void certify(const SpacetimeModel& model) {
  std::mt19937_64 gen(0x5eed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = model.dim();
  const ChartBox& box = model.chart();
  int accepted = 0;
  for (int draw = 0; draw < 4000 && accepted < 64; ++draw) {
    Vec x(n), v(n);
    for (int i = 0; i < n; ++i) x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(gen);
    for (int i = 0; i < n; ++i) v(i) = 2.0 * unit(gen) - 1.0;
    // Bias toward the cone's boundary region as well as its axis.
    if (draw % 2 == 0) v(0) = (v(0) >= 0 ? 1.0 : -1.0) * (1.0 + 3.0 * unit(gen));
    if (v.norm() < 1e-3 || !model.in_cone(v)) continue;
    ++accepted;
    LagrangianDerivatives d;
    model.derivatives(x, v, 2, d);
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = d.Lvv(i, j);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    int negative = 0;
    for (int i = 0; i < n; ++i) {
      double lam = es.eigenvalues()(i);
      if (!std::isfinite(lam) || std::abs(lam) < 1e-9) {
        throw Error(ErrorCode::kInvalidParams, model.name() + ": degenerate fundamental tensor on the chart");
      }
      if (lam < 0) ++negative;
    }
    if (negative != 1) {
      throw Error(ErrorCode::kInvalidParams, model.name() + ": signature (-,+,...,+) fails on the declared cone");
    }
    Vec X = model.orientation(x);
    if (!(model.lagrangian(x, X) < 0) || !model.in_cone(X)) {
      throw Error(ErrorCode::kInvalidParams, model.name() + ": orientation field is not timelike");
    }
  }
}

}  // namespace

const std::vector<std::string>& zoo_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : kKinds) out.emplace_back(k.name);
    return out;
  }();
  return names;
}

ModelPtr zoo_model(std::string_view name, const ZooParams& p) {
  const KindInfo* info = nullptr;
  for (const auto& k : kKinds)
    if (name == k.name) info = &k;
  if (!info) throw Error(ErrorCode::kUnknownName, "no zoo model named '" + std::string(name) + "'");

  const Kind kind = info->kind;
  const int n = p.dim > 0 ? p.dim : info->default_dim;
  if (n < 2 || n > kMaxDim) throw Error(ErrorCode::kInvalidParams, "dim must lie in [2, 4]");
  if (!(p.radius > 0) || !std::isfinite(p.radius)) throw Error(ErrorCode::kInvalidParams, "radius must be positive");
  const bool finsler = kind == Kind::kFlatFinsler || kind == Kind::kPerturbedFinsler;
  if (finsler && !(std::abs(p.epsilon) <= 0.05)) {
    throw Error(ErrorCode::kInvalidParams, "|epsilon| must not exceed 0.05");
  }
  if (finsler && !(p.cone_c > 0)) throw Error(ErrorCode::kInvalidParams, "cone_c must be positive");

  ChartBox box = default_chart(kind, n, p.radius);
  if (p.chart_min) box.lo = *p.chart_min;
  if (p.chart_max) box.hi = *p.chart_max;
  if (box.lo.size() != n || box.hi.size() != n || ((box.hi - box.lo).array() <= 0).any()) {
    throw Error(ErrorCode::kInvalidParams, "chart_min/chart_max must describe a nonempty box of the model dimension");
  }
  if (kind == Kind::kDeSitter && max_spatial_radius(box) >= p.radius) {
    throw Error(ErrorCode::kInvalidParams, "de Sitter chart must lie strictly inside the static patch");
  }
  if (kind == Kind::kProductHyperbolic && max_spatial_radius(box) >= 2.0 * p.radius) {
    throw Error(ErrorCode::kInvalidParams, "hyperbolic chart must lie inside the conformal ball");
  }
  if (kind == Kind::kPerturbedFinsler) {
    double worst = std::abs(p.epsilon) * std::max(std::abs(1.0 + box.lo(1)), std::abs(1.0 + box.hi(1)));
    if (worst > 0.05) throw Error(ErrorCode::kInvalidParams, "epsilon(x) exceeds 0.05 on the chart");
  }

  std::optional<ValidityCone> cone;
  if (finsler && p.epsilon != 0.0) cone = ValidityCone{p.cone_c};

  auto model = std::make_shared<ZooModel>(kind, info->name, n, box, cone, p.radius, p.epsilon);
  certify(*model);

  nlohmann::json params = {{"name", info->name}, {"dim", n}};
  if (kind == Kind::kDeSitter || kind == Kind::kProductHyperbolic || kind == Kind::kProductSphere) {
    params["radius"] = p.radius;
  }
  if (finsler) {
    params["epsilon"] = p.epsilon;
    params["cone_c"] = p.cone_c;
  }
  params["chart_min"] = std::vector<double>(box.lo.data(), box.lo.data() + n);
  params["chart_max"] = std::vector<double>(box.hi.data(), box.hi.data() + n);
  model->set_params(std::move(params));
  return model;
}

namespace {

Vec box_corner(const nlohmann::json& j, int n) {
  Vec out(n);
  if (j.is_number()) {
    out.setConstant(j.get<double>());
  } else if (j.is_array() && static_cast<int>(j.size()) == n) {
    for (int i = 0; i < n; ++i) out(i) = j[i].get<double>();
  } else {
    throw Error(ErrorCode::kBadConfig, "chart_min/chart_max must be a number or an array of length dim");
  }
  return out;
}

}  // namespace

ModelPtr model_from_json(const nlohmann::json& cfg) {
  if (!cfg.is_object() || !cfg.contains("name") || !cfg["name"].is_string()) {
    throw Error(ErrorCode::kBadConfig, "model config needs a string \"name\"");
  }
  static const std::vector<std::string> known = {"name", "dim", "radius", "epsilon", "cone_c",
                                                  "chart_min", "chart_max", "reversed"};
  for (const auto& [key, _] : cfg.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::kBadConfig, "unknown model key \"" + key + "\"");
    }
  }
  try {
    ZooParams p;
    const std::string name = cfg["name"].get<std::string>();
    p.dim = cfg.value("dim", 0);
    if (p.dim == 0) {
      for (const auto& k : kKinds)
        if (name == k.name) p.dim = k.default_dim;
    }
    p.radius = cfg.value("radius", p.radius);
    p.epsilon = cfg.value("epsilon", p.epsilon);
    p.cone_c = cfg.value("cone_c", p.cone_c);
    if (cfg.contains("chart_min")) p.chart_min = box_corner(cfg["chart_min"], p.dim);
    if (cfg.contains("chart_max")) p.chart_max = box_corner(cfg["chart_max"], p.dim);
    ModelPtr model = zoo_model(name, p);
    if (cfg.value("reversed", false)) model = reverse_model(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadConfig, e.what());
  }
}

}  // namespace lfgeom
