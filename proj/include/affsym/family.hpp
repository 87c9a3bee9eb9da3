#pragma once

// Hypersurfaces M^3 in R^4 built from a planar curve and a 2D affine sphere:
//   Case1: (gamma1, gamma2 * phi(u, v))                      proper phi
//   Case2: (gamma1 u, gamma1 v, gamma1 f + gamma2, gamma1)   improper phi = (u, v, f)
//   Case3: (u, v, f + gamma2, gamma1)                        improper phi = (u, v, f)

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "affsym/catalog.hpp"
#include "affsym/errors.hpp"
#include "affsym/jet.hpp"
#include "affsym/parallel.hpp"
#include "affsym/sampling.hpp"
#include "affsym/symmetry.hpp"

namespace affsym {

using FamilyCase = NuCase;

inline FamilyCase family_case_from_string(const std::string& s) {
  if (s == "Case1" || s == "case1" || s == "1") return FamilyCase::Case1;
  if (s == "Case2" || s == "case2" || s == "2") return FamilyCase::Case2;
  if (s == "Case3" || s == "case3" || s == "3") return FamilyCase::Case3;
  throw GeometryError(ErrorCode::ParamsOutOfRange, "unknown family case '" + s + "'");
}

struct FamilySpec {
  FamilyCase family_case = FamilyCase::Case1;
  CurveSpec curve;
  AffineSphereSpec sphere;
  bool admissible = false;
  bool definite = false;
  int wronskian_sign = 0;  // 0 when the sign is not constant on t_range
  std::optional<double> failing_t;
};

struct BuiltFamily {
  ImmersionSpec spec;
  FamilySpec family;
};

namespace detail {

// Nondegeneracy product of each case and the product whose sign decides definiteness.
struct CaseProducts {
  double nondegeneracy = 0.0;
  double definiteness = 0.0;
};

inline CaseProducts case_products(FamilyCase c, const CurveDerivatives& d) {
  const double g1 = d.value[0];
  const double g2 = d.value[1];
  const double g1p = d.first[0];
  const double w = d.wronskian();
  switch (c) {
    case FamilyCase::Case1: return {g2 * g1 * g1p * w, g2 * g1p * w};
    case FamilyCase::Case2: return {g1 * g1p * w, g1 * g1p * w};
    case FamilyCase::Case3: return {g1p * w, g1p * w};
  }
  return {};
}

inline std::vector<double> admissibility_samples(std::pair<double, double> range) {
  std::vector<double> ts;
  const int count = 256;
  for (int k = 0; k < count; ++k) ts.push_back(range.first + (range.second - range.first) * (k + 0.5) / count);
  ts.push_back(range.first);
  ts.push_back(range.second);
  return ts;
}

inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace detail

// Evaluates the admissibility and definiteness conditions without throwing.
inline FamilySpec assess_family(FamilyCase c, const CurveSpec& curve, const AffineSphereSpec& sphere) {
  FamilySpec f;
  f.family_case = c;
  f.curve = curve;
  f.sphere = sphere;

  int nondeg_sign = 0, def_sign = 0, w_sign = 0;
  bool admissible = true, def_constant = true, w_constant = true;
  for (double t : detail::admissibility_samples(curve.t_range)) {
    const CurveDerivatives d = curve.derivatives(t);
    const auto p = detail::case_products(c, d);
    const double scale = 1.0 + std::abs(d.value[0]) + std::abs(d.value[1]) + std::abs(d.first[0]) +
                         std::abs(d.first[1]) + std::abs(d.second[0]) + std::abs(d.second[1]);
    const bool zero = !(std::abs(p.nondegeneracy) > 1e-12 * std::pow(scale, 4)) || !std::isfinite(p.nondegeneracy);
    const int s = zero ? 0 : detail::sign_of(p.nondegeneracy);
    if (admissible && (s == 0 || (nondeg_sign != 0 && s != nondeg_sign))) {
      admissible = false;
      f.failing_t = t;
    }
    if (nondeg_sign == 0) nondeg_sign = s;

    const int ds = detail::sign_of(p.definiteness);
    if (def_sign == 0) def_sign = ds;
    def_constant = def_constant && ds == def_sign && ds != 0;

    const int ws = detail::sign_of(d.wronskian());
    if (w_sign == 0) w_sign = ws;
    w_constant = w_constant && ws == w_sign && ws != 0;
  }
  f.admissible = admissible;
  f.wronskian_sign = w_constant ? w_sign : 0;

  bool kind_ok = true;
  int wanted = 1;
  switch (c) {
    case FamilyCase::Case1:
      kind_ok = sphere.kind != SphereKind::Improper;
      wanted = sphere.kind == SphereKind::HyperbolicProper ? 1 : -1;
      break;
    case FamilyCase::Case2:
    case FamilyCase::Case3:
      kind_ok = sphere.kind == SphereKind::Improper;
      wanted = 1;
      break;
  }
  f.definite = kind_ok && admissible && def_constant && def_sign == wanted;
  return f;
}

inline BuiltFamily build_family(FamilyCase c, const CurveSpec& curve, const AffineSphereSpec& sphere) {
  if (c == FamilyCase::Case1 && sphere.kind == SphereKind::Improper) {
    throw GeometryError(ErrorCode::KindMismatch, "Case1 needs a proper affine sphere");
  }
  if (c != FamilyCase::Case1 && sphere.kind != SphereKind::Improper) {
    throw GeometryError(ErrorCode::KindMismatch, to_string(c) + " needs an improper affine sphere");
  }
  if (!(curve.t_range.first < curve.t_range.second)) {
    throw GeometryError(ErrorCode::ParamsOutOfRange, "empty t_range");
  }
  BuiltFamily out;
  out.family = assess_family(c, curve, sphere);
  if (!out.family.admissible) {
    throw GeometryError(ErrorCode::InadmissibleCurve, "nondegeneracy product vanishes or changes sign on t_range",
                        out.family.failing_t);
  }

  ChartBox box;
  box.bounds.push_back(curve.t_range);
  for (const auto& b : sphere.spec.chart_box.bounds) box.bounds.push_back(b);
  const SeriesMap phi_s = sphere.spec.series_eval;
  const PointMap phi_p = sphere.spec.point_eval;
  const std::string name = to_string(c) + "(" + sphere.name + ", " + to_string(curve.kind) + ")";

  auto assemble = [c](const auto& g, const auto& phi) {
    using T = std::decay_t<decltype(g[0])>;
    switch (c) {
      case FamilyCase::Case1: return std::vector<T>{g[0], g[1] * phi[0], g[1] * phi[1], g[1] * phi[2]};
      case FamilyCase::Case2: return std::vector<T>{g[0] * phi[0], g[0] * phi[1], g[0] * phi[2] + g[1], g[0]};
      case FamilyCase::Case3: return std::vector<T>{phi[0], phi[1], phi[2] + g[1], g[0]};
    }
    return std::vector<T>{};
  };

  out.spec.name = name;
  out.spec.domain_dim = 3;
  out.spec.ambient_dim = 4;
  out.spec.chart_box = box;
  if (phi_s) {
    out.spec.series_eval = [curve, phi_s, assemble](const std::vector<Series>& x) {
      const auto g = curve.eval(x[0]);
      return assemble(g, phi_s({x[1], x[2]}));
    };
  }
  out.spec.point_eval = [curve, phi_p, assemble](const Eigen::VectorXd& x) {
    const auto g = curve.eval(x[0]);
    const Eigen::VectorXd phi = phi_p(Eigen::Vector2d(x[1], x[2]));
    const std::vector<double> y = assemble(g, std::vector<double>{phi[0], phi[1], phi[2]});
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(y.data(), 4));
  };
  return out;
}

// ---------------------------------------------------------------------------

struct RoundtripMismatch {
  Eigen::VectorXd point;
  std::string expected;
  std::string got;
};

struct RoundtripReport {
  int samples = 0;
  int so2 = 0;
  int z3 = 0;
  int not_applicable = 0;
  int case_matches = 0;
  std::vector<RoundtripMismatch> mismatches;
  std::vector<SymmetryReport> reports;

  bool ok() const { return mismatches.empty() && samples > 0; }
};

inline RoundtripReport roundtrip_verify(const BuiltFamily& built, const std::vector<Eigen::VectorXd>& points,
                                        const ClassifyOptions& opts = {}) {
  const SymmetryGroup expected_group = built.family.sphere.quadric ? SymmetryGroup::SO2 : SymmetryGroup::Z3;
  const auto reports = parallel_map<SymmetryReport>(
      points.size(), [&](std::size_t i) { return classify_point(built.spec, points[i], opts); });

  RoundtripReport out;
  out.samples = static_cast<int>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SymmetryReport& r = reports[i];
    switch (r.group) {
      case SymmetryGroup::SO2: ++out.so2; break;
      case SymmetryGroup::Z3: ++out.z3; break;
      case SymmetryGroup::NotApplicable: ++out.not_applicable; break;
    }
    if (r.group != expected_group) {
      out.mismatches.push_back({points[i], to_string(expected_group), r.label()});
      continue;
    }
    const auto cls = r.nu_class();
    if (!cls) {
      if (opts.with_patch) out.mismatches.push_back({points[i], to_string(built.family.family_case), "no eta"});
      continue;
    }
    if (*cls == built.family.family_case) {
      ++out.case_matches;
    } else {
      out.mismatches.push_back({points[i], to_string(built.family.family_case), to_string(*cls)});
    }
  }
  out.reports = reports;
  return out;
}

inline RoundtripReport roundtrip_verify(const BuiltFamily& built, int samples, std::uint64_t seed,
                                        const ClassifyOptions& opts = {}) {
  return roundtrip_verify(built, random_chart_points(built.spec.chart_box, samples, seed), opts);
}

}  // namespace affsym
