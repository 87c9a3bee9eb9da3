#include <gtest/gtest.h>

#include <cmath>

#include "affsym/family.hpp"

using namespace affsym;

namespace {

struct NamedFamily {
  const char* name;
  FamilyCase c;
  CurveSpec curve;
  const char* sphere;
  SymmetryGroup group;
};

std::vector<NamedFamily> families() {
  return {
      {"case1_ellipsoid", FamilyCase::Case1, power_curve(1.0, 1.0 / 3.0, {0.1, 1.0}), "ellipsoid", SymmetryGroup::SO2},
      {"case1_titeica", FamilyCase::Case1, polynomial_curve({0, 1}, {0, 0, 1}, {0.5, 1.5}), "titeica", SymmetryGroup::Z3},
      {"case2_ma_wedge", FamilyCase::Case2, polynomial_curve({0, 1}, {0, 0, 0.5}, {0.5, 1.5}), "ma_wedge",
       SymmetryGroup::Z3},
      {"case3_ma_wedge", FamilyCase::Case3, exp_curve({0.5, 1.5}), "ma_wedge", SymmetryGroup::Z3},
      {"case2_paraboloid", FamilyCase::Case2, polynomial_curve({0, 1}, {0, 0, 0.5}, {0.5, 1.5}), "paraboloid",
       SymmetryGroup::SO2},
      {"case3_paraboloid", FamilyCase::Case3, exp_curve({0.5, 1.5}), "paraboloid", SymmetryGroup::SO2},
  };
}

template <class Fn>
ErrorCode error_of(Fn fn) {
  try {
    fn();
  } catch (const GeometryError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no GeometryError thrown";
  return ErrorCode::BlowUp;
}

}  // namespace

TEST(SphereCatalog, AllSpheresSatisfyTheirShapeOperator) {
  for (const char* name : {"ellipsoid", "hyperboloid_sheet", "titeica", "paraboloid", "ma_wedge"}) {
    const AffineSphereSpec s = sphere_catalog(name);
    const SphereCheck c = check_sphere(s);
    EXPECT_LE(c.shape_error, 1e-8) << name;
    EXPECT_LE(c.max_apolarity, 1e-8) << name;
    if (s.quadric) EXPECT_LE(c.max_pick, 1e-14) << name;
  }
  EXPECT_LE(check_sphere(sphere_catalog("ellipsoid", {{"a", 3.0}, {"b", 0.25}})).shape_error, 1e-8);
}

TEST(SphereCatalog, Kinds) {
  EXPECT_EQ(sphere_catalog("ellipsoid").kind, SphereKind::EllipticProper);
  EXPECT_EQ(sphere_catalog("hyperboloid_sheet").kind, SphereKind::HyperbolicProper);
  EXPECT_EQ(sphere_catalog("titeica").kind, SphereKind::HyperbolicProper);
  EXPECT_EQ(sphere_catalog("paraboloid").kind, SphereKind::Improper);
  EXPECT_EQ(sphere_catalog("ma_wedge").kind, SphereKind::Improper);
  EXPECT_FALSE(sphere_catalog("titeica").quadric);
  EXPECT_TRUE(sphere_catalog("paraboloid").quadric);
}

TEST(SphereCatalog, WedgeSolvesMongeAmpere) {
  for (const Params& p : {Params{}, Params{{"alpha", -0.5}, {"beta", 1.0}}, Params{{"alpha", 2.0}, {"beta", 3.0}}}) {
    const ImmersionSpec spec = sphere_catalog("ma_wedge", p).spec;
    for (const auto& x : random_chart_points(spec.chart_box, 10, 31)) {
      const Jet j = jet_eval(spec, x, 2);
      const double fuu = j.partial({0, 0})[2], fvv = j.partial({1, 1})[2], fuv = j.partial({0, 1})[2];
      EXPECT_NEAR(fuu * fvv - fuv * fuv, 1.0, 1e-12);
    }
  }
}

TEST(SphereCatalog, Errors) {
  EXPECT_EQ(error_of([] { sphere_catalog("torus"); }), ErrorCode::UnknownSurface);
  EXPECT_EQ(error_of([] { hypersurface_catalog("torus3"); }), ErrorCode::UnknownSurface);
  EXPECT_EQ(error_of([] { sphere_catalog("ellipsoid", {{"a", -1.0}}); }), ErrorCode::ParamsOutOfRange);
  EXPECT_EQ(error_of([] { sphere_catalog("ellipsoid", {{"radius", 2.0}}); }), ErrorCode::ParamsOutOfRange);
  EXPECT_EQ(error_of([] { sphere_catalog("ma_wedge", {{"alpha", 0.0}}); }), ErrorCode::ParamsOutOfRange);
  EXPECT_EQ(error_of([] { sphere_catalog("ma_wedge", {{"alpha", 2.0}, {"beta", 1.0}}); }),
            ErrorCode::ParamsOutOfRange);
}

TEST(Family, CoshSinhIsDefiniteWithNegativeWronskian) {
  const FamilySpec f = assess_family(FamilyCase::Case1, cosh_sinh_curve({0.1, 1.0}), sphere_catalog("ellipsoid"));
  EXPECT_TRUE(f.admissible);
  EXPECT_TRUE(f.definite);
  EXPECT_EQ(f.wronskian_sign, -1);
}

TEST(Family, CoshSinhOverEllipsoidIsAQuadric) {
  // (cosh t, sinh t * x) with |x| = 1 lies on the hyperboloid y0^2 - |y|^2 = 1
  const BuiltFamily b = build_family(FamilyCase::Case1, cosh_sinh_curve({0.1, 1.0}), sphere_catalog("ellipsoid"));
  for (const auto& p : random_chart_points(b.spec.chart_box, 5, 32)) {
    const Eigen::VectorXd y = b.spec.point_eval(p);
    EXPECT_NEAR(y[0] * y[0] - y.tail(3).squaredNorm(), 1.0, 1e-12);
    const SymmetryReport r = classify_point(b.spec, p);
    EXPECT_EQ(r.label(), "NotApplicable(mu1=0)");
  }
}

TEST(Family, LinearCurveIsInadmissible) {
  try {
    build_family(FamilyCase::Case1, polynomial_curve({0, 1}, {0, 1}, {0.5, 1.5}), sphere_catalog("ellipsoid"));
    FAIL() << "expected InadmissibleCurve";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.code(), ErrorCode::InadmissibleCurve);
    ASSERT_TRUE(e.where().has_value());
    EXPECT_GE(*e.where(), 0.5);
    EXPECT_LE(*e.where(), 1.5);
  }
}

TEST(Family, SignChangeIsInadmissible) {
  // gamma1' = 2t changes sign at t = 0
  const FamilySpec f =
      assess_family(FamilyCase::Case3, polynomial_curve({0, 0, 1}, {0, 0, 0, 1}, {-0.5, 0.5}), sphere_catalog("paraboloid"));
  EXPECT_FALSE(f.admissible);
  ASSERT_TRUE(f.failing_t.has_value());
  EXPECT_NEAR(*f.failing_t, 0.0, 0.01);
}

TEST(Family, ImproperParabolaIsDefinite) {
  const FamilySpec f =
      assess_family(FamilyCase::Case3, polynomial_curve({0, 1}, {0, 0, 0.5}, {0.5, 1.5}), sphere_catalog("paraboloid"));
  EXPECT_TRUE(f.admissible);
  EXPECT_TRUE(f.definite);
  EXPECT_EQ(f.wronskian_sign, 1);
}

TEST(Family, KindMismatch) {
  EXPECT_EQ(error_of([] { build_family(FamilyCase::Case1, exp_curve({0.5, 1.5}), sphere_catalog("paraboloid")); }),
            ErrorCode::KindMismatch);
  EXPECT_EQ(error_of([] { build_family(FamilyCase::Case2, exp_curve({0.5, 1.5}), sphere_catalog("titeica")); }),
            ErrorCode::KindMismatch);
  EXPECT_EQ(error_of([] { family_case_from_string("Case4"); }), ErrorCode::ParamsOutOfRange);
  EXPECT_EQ(family_case_from_string("case2"), FamilyCase::Case2);
}

TEST(Family, ResidualsVanishOnBuiltFamilies) {
  for (const auto& f : families()) {
    const BuiltFamily b = build_family(f.c, f.curve, sphere_catalog(f.sphere));
    const ResidualReport r = structure_residuals(b.spec, random_chart_points(b.spec.chart_box, 10, 33));
    EXPECT_EQ(r.evaluated, 10) << f.name;
    EXPECT_TRUE(r.definiteness) << f.name;
    EXPECT_LE(r.max_residual(), 1e-6) << f.name;
  }
}

TEST(Family, RoundtripRecoversGroupAndCase) {
  for (const auto& f : families()) {
    const BuiltFamily b = build_family(f.c, f.curve, sphere_catalog(f.sphere));
    const RoundtripReport r = roundtrip_verify(b, 20, 34);
    EXPECT_TRUE(r.ok()) << f.name << ": " << (r.mismatches.empty() ? "" : r.mismatches.front().got);
    EXPECT_EQ(r.case_matches, 20) << f.name;
    EXPECT_EQ(f.group == SymmetryGroup::SO2 ? r.so2 : r.z3, 20) << f.name;
  }
}

TEST(Family, DefiniteFlagMatchesPipeline) {
  // Case1 over an elliptic sphere needs gamma2 gamma1' W < 0; (t, -t^2) has W = -2 and gamma2 < 0
  const CurveSpec bad = polynomial_curve({0, 1}, {0, 0, -1}, {0.1, 1.0});
  const FamilySpec f = assess_family(FamilyCase::Case1, bad, sphere_catalog("ellipsoid"));
  EXPECT_TRUE(f.admissible);
  EXPECT_FALSE(f.definite);
  const BuiltFamily b = build_family(FamilyCase::Case1, bad, sphere_catalog("ellipsoid"));
  EXPECT_FALSE(structure_residuals(b.spec, random_chart_points(b.spec.chart_box, 3, 35)).definiteness);

  for (const auto& nf : families()) {
    EXPECT_TRUE(assess_family(nf.c, nf.curve, sphere_catalog(nf.sphere)).definite) << nf.name;
  }
}

TEST(Family, ReparametrizationKeepsInvariants) {
  // sigma(t) = 0.5 t + 0.5 t^2 maps [0.2, 0.85] into the original range
  const CurveSpec base = power_curve(1.0, 1.0 / 3.0, {0.1, 1.0});
  const CurveSpec re = reparametrize(base, {0.0, 0.5, 0.5}, {0.2, 0.85});
  const BuiltFamily b0 = build_family(FamilyCase::Case1, base, sphere_catalog("ellipsoid"));
  const BuiltFamily b1 = build_family(FamilyCase::Case1, re, sphere_catalog("ellipsoid"));
  for (const auto& p : random_chart_points(b1.spec.chart_box, 5, 36)) {
    Eigen::VectorXd q = p;
    q[0] = 0.5 * p[0] + 0.5 * p[0] * p[0];
    const SymmetryReport r0 = classify_point(b0.spec, q);
    const SymmetryReport r1 = classify_point(b1.spec, p);
    EXPECT_EQ(r0.label(), r1.label());
    EXPECT_NEAR(r0.mu1, r1.mu1, 1e-8);
    EXPECT_NEAR(r0.lambda, r1.lambda, 1e-8);
    EXPECT_NEAR(r0.a, r1.a, 1e-8);
    ASSERT_TRUE(r0.eta && r1.eta);
    EXPECT_NEAR(*r0.eta, *r1.eta, 1e-6);
  }
  EXPECT_EQ(error_of([&] { reparametrize(base, {1.0, -1.0}, {0.0, 1.0}); }), ErrorCode::ParamsOutOfRange);
}
