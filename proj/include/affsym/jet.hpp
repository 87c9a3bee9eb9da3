#pragma once

// Parametric immersions U ⊂ R^n -> R^{n+1} and their derivative jets.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "affsym/errors.hpp"
#include "affsym/series.hpp"

namespace affsym {

inline constexpr int kMaxJetOrder = 4;

struct ChartBox {
  std::vector<std::pair<double, double>> bounds;

  int dim() const { return static_cast<int>(bounds.size()); }

  bool contains(const Eigen::VectorXd& p, double slack = 1e-12) const {
    if (p.size() != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      const auto [lo, hi] = bounds[static_cast<std::size_t>(i)];
      if (!(p[i] >= lo - slack && p[i] <= hi + slack)) return false;
    }
    return true;
  }

  // The box shrunk by `fraction` of each side length on both ends.
  ChartBox shrunk(double fraction) const {
    ChartBox out = *this;
    for (auto& [lo, hi] : out.bounds) {
      const double pad = (hi - lo) * fraction;
      lo += pad;
      hi -= pad;
    }
    return out;
  }

  Eigen::VectorXd center() const {
    Eigen::VectorXd c(dim());
    for (int i = 0; i < dim(); ++i) {
      c[i] = 0.5 * (bounds[static_cast<std::size_t>(i)].first + bounds[static_cast<std::size_t>(i)].second);
    }
    return c;
  }
};

using SeriesMap = std::function<std::vector<Series>(const std::vector<Series>&)>;
using PointMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct ImmersionSpec {
  std::string name;
  int domain_dim = 0;
  int ambient_dim = 0;
  ChartBox chart_box;
  // Closed-form route: the map evaluated in Taylor arithmetic. Empty for
  // user-supplied maps that only provide point evaluation.
  SeriesMap series_eval;
  PointMap point_eval;

  bool analytic() const { return static_cast<bool>(series_eval); }
};

// Wraps a generic callable `fn(const std::vector<T>&) -> std::vector<T>` that
// is instantiable for T = double and T = Series.
template <class Fn>
ImmersionSpec make_analytic_spec(std::string name, int domain_dim, ChartBox box, Fn fn) {
  ImmersionSpec spec;
  spec.name = std::move(name);
  spec.domain_dim = domain_dim;
  spec.ambient_dim = domain_dim + 1;
  spec.chart_box = std::move(box);
  spec.series_eval = [fn](const std::vector<Series>& x) { return fn(x); };
  spec.point_eval = [fn](const Eigen::VectorXd& p) {
    std::vector<double> x(p.data(), p.data() + p.size());
    const std::vector<double> y = fn(x);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
  };
  return spec;
}

inline ImmersionSpec make_numeric_spec(std::string name, int domain_dim, ChartBox box, PointMap fn) {
  ImmersionSpec spec;
  spec.name = std::move(name);
  spec.domain_dim = domain_dim;
  spec.ambient_dim = domain_dim + 1;
  spec.chart_box = std::move(box);
  spec.point_eval = std::move(fn);
  return spec;
}

// Partial derivatives of an immersion at a point, one Taylor series per ambient
// component. Each mixed partial is stored once (per sorted multi-index).
class Jet {
 public:
  Jet(int domain_dim, int order, std::vector<Series> components)
      : domain_dim_(domain_dim), order_(order), components_(std::move(components)) {}

  int domain_dim() const { return domain_dim_; }
  int ambient_dim() const { return static_cast<int>(components_.size()); }
  int order() const { return order_; }
  const std::vector<Series>& components() const { return components_; }

  Eigen::VectorXd partial(const MultiIndex& a) const {
    Eigen::VectorXd out(ambient_dim());
    for (int c = 0; c < ambient_dim(); ++c) out[c] = components_[static_cast<std::size_t>(c)].partial(a);
    return out;
  }

  // partial({0, 1}) is d^2 F / du dv; partial({}) is F itself.
  Eigen::VectorXd partial(std::initializer_list<int> axes) const {
    MultiIndex a{};
    for (int axis : axes) ++a[static_cast<std::size_t>(axis)];
    return partial(a);
  }

 private:
  int domain_dim_;
  int order_;
  std::vector<Series> components_;
};

struct FiniteDifferenceOptions {
  // Step for first derivatives; a derivative of total order k uses
  // base_step * growth^(k-1) so truncation and roundoff stay balanced.
  double base_step = 5e-3;
  double growth = 2.5;
  int richardson_levels = 2;  // each level halves the step and removes the next even power of h
};

namespace detail {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

// Second-order central stencils for the m-th derivative (unit step).
inline const Stencil& central_stencil(int m) {
  static const std::vector<Stencil> stencils{
      {{0}, {1.0}},
      {{-1, 1}, {-0.5, 0.5}},
      {{-1, 0, 1}, {1.0, -2.0, 1.0}},
      {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
      {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
  };
  return stencils[static_cast<std::size_t>(m)];
}

inline Eigen::VectorXd tensor_difference(const PointMap& fn, const Eigen::VectorXd& p, const MultiIndex& a,
                                         int dim, double h) {
  Eigen::VectorXd acc;
  std::vector<int> pos(static_cast<std::size_t>(dim), 0);
  while (true) {
    Eigen::VectorXd q = p;
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
      const Stencil& s = central_stencil(a[static_cast<std::size_t>(i)]);
      q[i] += h * s.offsets[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])];
      w *= s.weights[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])];
    }
    Eigen::VectorXd y = fn(q) * w;
    if (acc.size() == 0) {
      acc = y;
    } else {
      acc += y;
    }
    int i = 0;
    for (; i < dim; ++i) {
      auto& k = pos[static_cast<std::size_t>(i)];
      if (++k < static_cast<int>(central_stencil(a[static_cast<std::size_t>(i)]).offsets.size())) break;
      k = 0;
    }
    if (i == dim) break;
  }
  return acc / std::pow(h, total_degree(a));
}

}  // namespace detail

inline Jet finite_difference_jet(const PointMap& fn, int domain_dim, const Eigen::VectorXd& point, int order,
                                 const FiniteDifferenceOptions& opts = {}) {
  const auto& table = MultiIndexTable::get(domain_dim);
  const Eigen::VectorXd f0 = fn(point);
  std::vector<Series> comps(static_cast<std::size_t>(f0.size()), Series(domain_dim, order));
  for (int k = 0; k < table.size(order); ++k) {
    const MultiIndex& a = table.index(k);
    const int deg = total_degree(a);
    Eigen::VectorXd d;
    if (deg == 0) {
      d = f0;
    } else {
      const double h = opts.base_step * std::pow(opts.growth, deg - 1);
      std::vector<Eigen::VectorXd> table;
      for (int level = 0; level <= opts.richardson_levels; ++level) {
        table.push_back(detail::tensor_difference(fn, point, a, domain_dim, h * std::pow(0.5, level)));
      }
      double factor = 4.0;
      for (int level = 1; level <= opts.richardson_levels; ++level, factor *= 4.0) {
        for (std::size_t r = table.size() - 1; r >= static_cast<std::size_t>(level); --r) {
          table[r] = (factor * table[r] - table[r - 1]) / (factor - 1.0);
        }
      }
      d = table.back();
    }
    for (int c = 0; c < f0.size(); ++c) {
      comps[static_cast<std::size_t>(c)].coefficient(k) = d[c] / table.factorial_weight(k);
    }
  }
  return Jet(domain_dim, order, std::move(comps));
}

namespace detail {

// No chart check: used for stencils that may step just outside the box.
inline Jet expand(const ImmersionSpec& spec, const Eigen::VectorXd& point, int order) {
  if (order < 0 || order > kMaxJetOrder) {
    throw GeometryError(ErrorCode::OrderUnsupported, "jet order " + std::to_string(order) + " exceeds 4");
  }
  if (!spec.analytic()) return finite_difference_jet(spec.point_eval, spec.domain_dim, point, order);
  std::vector<Series> x;
  x.reserve(static_cast<std::size_t>(spec.domain_dim));
  for (int i = 0; i < spec.domain_dim; ++i) x.push_back(Series::variable(spec.domain_dim, order, i, point[i]));
  std::vector<Series> y = spec.series_eval(x);
  for (auto& s : y) {
    if (s.vars() == 0) s = Series(spec.domain_dim, order, s.value());
  }
  return Jet(spec.domain_dim, order, std::move(y));
}

}  // namespace detail

// x -> A F(x) + b. The closed-form route is kept when `spec` has one.
inline ImmersionSpec affine_image(const ImmersionSpec& spec, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  ImmersionSpec out = spec;
  out.name = spec.name + "*A";
  if (spec.series_eval) {
    out.series_eval = [inner = spec.series_eval, A, b](const std::vector<Series>& x) {
      const std::vector<Series> y = inner(x);
      std::vector<Series> z;
      for (Eigen::Index r = 0; r < A.rows(); ++r) {
        Series acc(b[r]);
        for (Eigen::Index c = 0; c < A.cols(); ++c) acc += A(r, c) * y[static_cast<std::size_t>(c)];
        z.push_back(acc);
      }
      return z;
    };
  }
  out.point_eval = [inner = spec.point_eval, A, b](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(A * inner(x) + b);
  };
  return out;
}

inline Jet jet_eval(const ImmersionSpec& spec, const Eigen::VectorXd& point, int order) {
  if (order < 0 || order > kMaxJetOrder) {
    throw GeometryError(ErrorCode::OrderUnsupported, "jet order " + std::to_string(order) + " exceeds 4");
  }
  if (!spec.chart_box.contains(point)) {
    throw GeometryError(ErrorCode::PointOutsideChart, "point outside the chart box of " + spec.name);
  }
  return detail::expand(spec, point, order);
}

}  // namespace affsym
