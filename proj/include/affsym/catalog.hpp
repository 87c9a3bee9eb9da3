#pragma once

// Catalog of two-dimensional affine spheres, the unit 3-sphere, and planar
// curves used by the family builders.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "affsym/blaschke.hpp"
#include "affsym/errors.hpp"
#include "affsym/jet.hpp"
#include "affsym/sampling.hpp"
#include "affsym/series.hpp"

namespace affsym {

enum class SphereKind { EllipticProper, HyperbolicProper, Improper };

inline std::string to_string(SphereKind k) {
  switch (k) {
    case SphereKind::EllipticProper: return "elliptic_proper";
    case SphereKind::HyperbolicProper: return "hyperbolic_proper";
    case SphereKind::Improper: return "improper";
  }
  return "?";
}

using Params = std::map<std::string, double>;

struct AffineSphereSpec {
  std::string name;
  SphereKind kind = SphereKind::EllipticProper;
  ImmersionSpec spec;
  bool mean_curvature_normalized = true;
  bool quadric = false;
  Params params;
};

namespace detail {

inline double param(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline void check_keys(const Params& p, std::initializer_list<const char*> allowed, const std::string& surface) {
  for (const auto& [key, value] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw GeometryError(ErrorCode::ParamsOutOfRange, "unknown parameter '" + key + "' for " + surface);
    if (!std::isfinite(value)) throw GeometryError(ErrorCode::ParamsOutOfRange, "parameter '" + key + "' is not finite");
  }
}

}  // namespace detail

// Names: ellipsoid {a, b} (semi-axes a, b, 1/(ab)), hyperboloid_sheet,
// titeica, paraboloid, ma_wedge {alpha, beta}.
inline AffineSphereSpec sphere_catalog(const std::string& name, const Params& params = {}) {
  using std::cos;
  using std::exp;
  using std::sin;
  using std::sqrt;

  AffineSphereSpec out;
  out.name = name;
  out.params = params;
  const ChartBox unit{{{-1.0, 1.0}, {-1.0, 1.0}}};

  if (name == "ellipsoid") {
    detail::check_keys(params, {"a", "b"}, name);
    const double a = detail::param(params, "a", 1.0);
    const double b = detail::param(params, "b", 1.0);
    if (!(a > 0.0 && b > 0.0)) throw GeometryError(ErrorCode::ParamsOutOfRange, "ellipsoid semi-axes must be positive");
    const double c = 1.0 / (a * b);
    out.kind = SphereKind::EllipticProper;
    out.quadric = true;
    // u = longitude, v = latitude
    out.spec = make_analytic_spec(name, 2, unit, [a, b, c](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      const T cv = cos(x[1]);
      return std::vector<T>{a * (cv * cos(x[0])), b * (cv * sin(x[0])), c * sin(x[1])};
    });
  } else if (name == "hyperboloid_sheet") {
    detail::check_keys(params, {}, name);
    out.kind = SphereKind::HyperbolicProper;
    out.quadric = true;
    out.spec = make_analytic_spec(name, 2, unit, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return std::vector<T>{x[0], x[1], sqrt(x[0] * x[0] + x[1] * x[1] + 1.0)};
    });
  } else if (name == "titeica") {
    detail::check_keys(params, {}, name);
    out.kind = SphereKind::HyperbolicProper;
    out.quadric = false;
    // xyz = 3^{-3/2}: the 1/sqrt(3) factor normalizes S to -Id
    const double s = 1.0 / std::sqrt(3.0);
    out.spec = make_analytic_spec(name, 2, unit, [s](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return std::vector<T>{s * exp(x[0]), s * exp(x[1]), s * exp(-(x[0] + x[1]))};
    });
  } else if (name == "paraboloid") {
    detail::check_keys(params, {}, name);
    out.kind = SphereKind::Improper;
    out.quadric = true;
    out.spec = make_analytic_spec(name, 2, unit, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      return std::vector<T>{x[0], x[1], 0.5 * (x[0] * x[0] + x[1] * x[1])};
    });
  } else if (name == "ma_wedge") {
    detail::check_keys(params, {"alpha", "beta"}, name);
    const double alpha = detail::param(params, "alpha", 1.0);
    const double beta = detail::param(params, "beta", 2.0);
    if (alpha == 0.0) throw GeometryError(ErrorCode::ParamsOutOfRange, "ma_wedge needs alpha != 0");
    if (!(beta - std::abs(alpha) > 0.0)) {
      throw GeometryError(ErrorCode::ParamsOutOfRange, "ma_wedge needs alpha*u + beta > 0 on u in [-1, 1]");
    }
    out.kind = SphereKind::Improper;
    out.quadric = false;
    // f = v^2 / (2s) + s^3 / (6 alpha^2), s = alpha u + beta; det Hess f = 1
    out.spec = make_analytic_spec(name, 2, unit, [alpha, beta](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      const T s = alpha * x[0] + beta;
      const T f = 0.5 * (x[1] * x[1]) / s + (s * s * s) / (6.0 * alpha * alpha);
      return std::vector<T>{x[0], x[1], f};
    });
  } else {
    throw GeometryError(ErrorCode::UnknownSurface, "unknown affine sphere '" + name + "'");
  }
  return out;
}

struct SphereCheck {
  double shape_error = 0.0;   // |S - c Id| (proper) or |xi - (0,0,1)| (improper)
  double max_pick = 0.0;
  double max_apolarity = 0.0;
  double mean_curvature = 0.0;
};

// Blaschke pipeline on a 3x3 probe grid.
inline SphereCheck check_sphere(const AffineSphereSpec& s) {
  SphereCheck out;
  const double c = s.kind == SphereKind::EllipticProper ? 1.0 : s.kind == SphereKind::HyperbolicProper ? -1.0 : 0.0;
  for (const auto& p : grid_chart_points(s.spec.chart_box, {3, 3})) {
    const BlaschkeData d = blaschke_data(s.spec, p);
    if (s.kind == SphereKind::Improper) {
      out.shape_error = std::max(out.shape_error, (d.xi - Eigen::Vector3d(0, 0, 1)).cwiseAbs().maxCoeff());
      out.shape_error = std::max(out.shape_error, d.S.cwiseAbs().maxCoeff());
    } else {
      out.shape_error =
          std::max(out.shape_error, (d.S - c * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff());
    }
    out.mean_curvature = 0.5 * d.S.trace();
    out.max_pick = std::max(out.max_pick, d.J);
    out.max_apolarity = std::max(out.max_apolarity, d.apolarity);
  }
  return out;
}

// Three-dimensional catalog: sphere3 (unit 3-sphere in R^4).
inline ImmersionSpec hypersurface_catalog(const std::string& name) {
  using std::cos;
  using std::sin;
  if (name == "sphere3") {
    return make_analytic_spec(name, 3, ChartBox{{{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}}}, [](const auto& x) {
      using T = std::decay_t<decltype(x[0])>;
      const T cw = cos(x[2]);
      const T cv = cos(x[1]);
      return std::vector<T>{cw * (cv * cos(x[0])), cw * (cv * sin(x[0])), cw * sin(x[1]), sin(x[2])};
    });
  }
  throw GeometryError(ErrorCode::UnknownSurface, "unknown hypersurface '" + name + "'");
}

// ---------------------------------------------------------------------------
// Planar curves gamma = (gamma1, gamma2)

enum class CurveKind { CoshSinh, Polynomial, Power, Exp };

inline std::string to_string(CurveKind k) {
  switch (k) {
    case CurveKind::CoshSinh: return "cosh_sinh";
    case CurveKind::Polynomial: return "polynomial";
    case CurveKind::Power: return "power";
    case CurveKind::Exp: return "exp";
  }
  return "?";
}

struct CurveDerivatives {
  std::array<double, 2> value{}, first{}, second{};
  // gamma2'' gamma1' - gamma1'' gamma2'
  double wronskian() const { return second[1] * first[0] - second[0] * first[1]; }
};

struct CurveSpec {
  CurveKind kind = CurveKind::Polynomial;
  std::vector<double> gamma1;  // polynomial coefficients, lowest degree first
  std::vector<double> gamma2;
  double coefficient = 1.0;    // power: gamma2 = coefficient * t^exponent
  double exponent = 2.0;
  std::vector<double> sigma;   // optional reparametrization t -> sigma(t), polynomial
  std::pair<double, double> t_range{0.5, 1.5};

  template <class T>
  static T horner(const std::vector<double>& c, const T& t) {
    if (c.empty()) return T(0.0) * t;
    T acc = T(c.back()) + 0.0 * t;
    for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * t + c[k];
    return acc;
  }

  template <class T>
  std::array<T, 2> eval(const T& t_in) const {
    using std::cosh;
    using std::exp;
    using std::pow;
    using std::sinh;
    const T t = sigma.empty() ? t_in : horner(sigma, t_in);
    switch (kind) {
      case CurveKind::CoshSinh: return {cosh(t), sinh(t)};
      case CurveKind::Polynomial: return {horner(gamma1, t), horner(gamma2, t)};
      case CurveKind::Power: return {t, coefficient * pow(t, exponent)};
      case CurveKind::Exp: return {t, exp(t)};
    }
    return {t, t};
  }

  CurveDerivatives derivatives(double t) const {
    const auto g = eval(Series::variable(1, 2, 0, t));
    CurveDerivatives d;
    for (int c = 0; c < 2; ++c) {
      d.value[static_cast<std::size_t>(c)] = g[static_cast<std::size_t>(c)].coefficient(0);
      d.first[static_cast<std::size_t>(c)] = g[static_cast<std::size_t>(c)].coefficient(1);
      d.second[static_cast<std::size_t>(c)] = 2.0 * g[static_cast<std::size_t>(c)].coefficient(2);
    }
    return d;
  }
};

inline CurveSpec cosh_sinh_curve(std::pair<double, double> range) {
  CurveSpec c;
  c.kind = CurveKind::CoshSinh;
  c.t_range = range;
  return c;
}

inline CurveSpec polynomial_curve(std::vector<double> g1, std::vector<double> g2, std::pair<double, double> range) {
  CurveSpec c;
  c.kind = CurveKind::Polynomial;
  c.gamma1 = std::move(g1);
  c.gamma2 = std::move(g2);
  c.t_range = range;
  return c;
}

inline CurveSpec power_curve(double coefficient, double exponent, std::pair<double, double> range) {
  CurveSpec c;
  c.kind = CurveKind::Power;
  c.coefficient = coefficient;
  c.exponent = exponent;
  c.t_range = range;
  return c;
}

inline CurveSpec exp_curve(std::pair<double, double> range) {
  CurveSpec c;
  c.kind = CurveKind::Exp;
  c.t_range = range;
  return c;
}

// gamma o sigma on the parameter interval `range`, where sigma is the
// polynomial with coefficients `sigma` (lowest first) and sigma' > 0 on range.
inline CurveSpec reparametrize(const CurveSpec& curve, std::vector<double> sigma, std::pair<double, double> range) {
  if (!curve.sigma.empty()) throw GeometryError(ErrorCode::ParamsOutOfRange, "curve is already reparametrized");
  CurveSpec out = curve;
  out.sigma = std::move(sigma);
  out.t_range = range;
  for (int k = 0; k <= 64; ++k) {
    const double t = range.first + (range.second - range.first) * k / 64.0;
    const Series s = CurveSpec::horner(out.sigma, Series::variable(1, 1, 0, t));
    if (!(s.coefficient(1) > 0.0)) {
      throw GeometryError(ErrorCode::ParamsOutOfRange, "reparametrization is not increasing", t);
    }
  }
  return out;
}

}  // namespace affsym
