#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "affsym/blaschke.hpp"
#include "affsym/catalog.hpp"
#include "affsym/family.hpp"
#include "affsym/sampling.hpp"

using namespace affsym;

namespace {

double max_abs(const Tensor12& K) {
  double m = 0.0;
  for (const auto& k : K) m = std::max(m, k.cwiseAbs().maxCoeff());
  return m;
}

Eigen::Matrix3d random_unimodular(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3d A;
  do {
    for (int i = 0; i < 9; ++i) A(i / 3, i % 3) = u(rng) + (i % 4 == 0 ? 1.5 : 0.0);
  } while (std::abs(A.determinant()) < 0.2);
  if (A.determinant() < 0) A.col(0) *= -1.0;
  return A / std::cbrt(A.determinant());
}

}  // namespace

TEST(Blaschke, ParaboloidIsImproperSphere) {
  const ImmersionSpec spec = sphere_catalog("paraboloid").spec;
  for (const auto& p : random_chart_points(spec.chart_box, 10, 1)) {
    const BlaschkeData d = blaschke_data(spec, p);
    // h = Hess f = Id, xi = (0, 0, 1), S = 0
    EXPECT_LE((d.h - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((d.xi - Eigen::Vector3d(0, 0, 1)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(d.S.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(max_abs(d.K), 1e-10);
  }
}

TEST(Blaschke, UnitSphereHasPositionNormal) {
  const ImmersionSpec spec = sphere_catalog("ellipsoid").spec;
  for (const auto& p : random_chart_points(spec.chart_box, 10, 2)) {
    const BlaschkeData d = blaschke_data(spec, p);
    EXPECT_LE((d.xi + spec.point_eval(p)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((d.S - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(max_abs(d.K), 1e-8);
  }
}

TEST(Blaschke, UnitThreeSphere) {
  const ImmersionSpec spec = hypersurface_catalog("sphere3");
  for (const auto& p : random_chart_points(spec.chart_box, 10, 3)) {
    const BlaschkeData d = blaschke_data(spec, p);
    EXPECT_LE((d.S - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(max_abs(d.K), 1e-8);
    EXPECT_LE((d.xi + spec.point_eval(p)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Blaschke, TransversalChoiceDoesNotMatter) {
  const ImmersionSpec spec = sphere_catalog("titeica").spec;
  const TransversalChoice other{2.5, {0.3, -0.7}};
  for (const auto& p : random_chart_points(spec.chart_box, 5, 4)) {
    const Jet jet = jet_eval(spec, p, 4);
    const AffineMetric m0 = affine_metric(jet);
    const AffineMetric m1 = affine_metric(jet, other);
    EXPECT_LE((m0.value - m1.value).cwiseAbs().maxCoeff(), 1e-9);
    const NormalField n0 = blaschke_normal(jet, m0);
    const NormalField n1 = blaschke_normal(jet, m1);
    EXPECT_LE((n0.value - n1.value).cwiseAbs().maxCoeff(), 1e-9);
    const ShapeOperatorResult s0 = shape_operator(jet, n0);
    const ShapeOperatorResult s1 = shape_operator(jet, n1);
    EXPECT_LE((s0.S - s1.S).cwiseAbs().maxCoeff(), 1e-9);
    const DifferenceTensorResult k0 = difference_tensor(jet, m0, n0);
    const DifferenceTensorResult k1 = difference_tensor(jet, m1, n1);
    EXPECT_NEAR(k0.J, k1.J, 1e-9);
  }
}

TEST(Blaschke, TiteicaIsProperHyperbolicSphereWithConstantPick) {
  const ImmersionSpec spec = sphere_catalog("titeica").spec;
  double J0 = -1.0;
  for (const auto& p : random_chart_points(spec.chart_box, 10, 5)) {
    const BlaschkeData d = blaschke_data(spec, p);
    EXPECT_LE((d.S + Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((d.xi - spec.point_eval(p)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GT(d.J, 0.1);
    if (J0 < 0) J0 = d.J;
    EXPECT_NEAR(d.J, J0, 1e-8);
  }
}

TEST(Blaschke, ImproperWedgeHasConstantNormal) {
  const ImmersionSpec spec = sphere_catalog("ma_wedge").spec;
  for (const auto& p : random_chart_points(spec.chart_box, 10, 6)) {
    const BlaschkeData d = blaschke_data(spec, p);
    EXPECT_LE((d.xi - Eigen::Vector3d(0, 0, 1)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(d.S.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GT(d.J, 1e-3);
  }
}

TEST(Blaschke, QuadricsHaveVanishingCubicForm) {
  for (const char* name : {"ellipsoid", "hyperboloid_sheet", "paraboloid"}) {
    const ImmersionSpec spec = sphere_catalog(name, std::string(name) == "ellipsoid" ? Params{{"a", 2.0}, {"b", 0.7}} : Params{}).spec;
    for (const auto& p : random_chart_points(spec.chart_box, 5, 7)) {
      const BlaschkeData d = blaschke_data(spec, p);
      EXPECT_LE(max_abs(d.K), 1e-8) << name;
      EXPECT_LE(d.J, 1e-14) << name;
    }
  }
}

TEST(Blaschke, ApolarityDefectMeasuresTrace) {
  // K = diag(0.1, 0, 0) in slot 0 of a 3D tensor: trace covector (0.1, 0, 0)
  Tensor12 K(3, Eigen::MatrixXd::Zero(3, 3));
  K[0](0, 0) = 0.1;
  EXPECT_NEAR(apolarity_defect(Eigen::MatrixXd::Identity(3, 3), K), 0.1, 1e-15);
  // with h = 4 Id the h-norm of the covector halves
  EXPECT_NEAR(apolarity_defect(4.0 * Eigen::MatrixXd::Identity(3, 3), K), 0.05, 1e-15);
}

TEST(Blaschke, ResidualDetectorsFireOnCorruptedShape) {
  const ImmersionSpec spec =
      build_family(FamilyCase::Case1, power_curve(1.0, 1.0 / 3.0, {0.1, 1.0}), sphere_catalog("ellipsoid")).spec;
  const auto pts = random_chart_points(spec.chart_box, 5, 8);
  const ResidualReport clean = structure_residuals(spec, pts);
  EXPECT_LE(clean.max_residual(), 1e-6);

  ResidualOptions scaled;
  scaled.corrupt_shape = [](const Eigen::MatrixXd& S, const Eigen::VectorXd&) { return Eigen::MatrixXd(1.01 * S); };
  EXPECT_GT(structure_residuals(spec, pts, scaled).gauss_nabla, 1e-3);

  ResidualOptions varying;
  varying.corrupt_shape = [](const Eigen::MatrixXd& S, const Eigen::VectorXd& p) {
    return Eigen::MatrixXd((1.0 + 0.01 * p[0]) * S);
  };
  EXPECT_GT(structure_residuals(spec, pts, varying).codazzi_S, 1e-3);
}

TEST(Blaschke, FlatGraphIsDegenerate) {
  const ImmersionSpec flat = make_analytic_spec("flat", 2, ChartBox{{{-1, 1}, {-1, 1}}}, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{x[0], x[1], x[0] + 0.0 * x[1]};
  });
  try {
    blaschke_data(flat, Eigen::Vector2d(0.1, 0.2));
    FAIL() << "expected DegenerateSurface";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSurface);
  }
  const ResidualReport r = structure_residuals(flat, {Eigen::Vector2d(0.1, 0.2)});
  EXPECT_EQ(r.evaluated, 0);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].code, ErrorCode::DegenerateSurface);
}

TEST(Blaschke, SaddleIsIndefinite) {
  const ImmersionSpec saddle = make_analytic_spec("saddle", 2, ChartBox{{{-1, 1}, {-1, 1}}}, [](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return std::vector<T>{x[0], x[1], x[0] * x[1]};
  });
  const ResidualReport r = structure_residuals(saddle, {Eigen::Vector2d(0.1, 0.2)});
  EXPECT_FALSE(r.definiteness);
}

TEST(Blaschke, EquiaffineInvariance) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ImmersionSpec spec = sphere_catalog("titeica").spec;
  const auto pts = random_chart_points(spec.chart_box, 3, 9);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Matrix3d A = random_unimodular(rng);
    const Eigen::Vector3d b(u(rng), u(rng), u(rng));
    const ImmersionSpec img = affine_image(spec, A, b);
    for (const auto& p : pts) {
      const BlaschkeData d0 = blaschke_data(spec, p);
      const BlaschkeData d1 = blaschke_data(img, p);
      EXPECT_LE((d1.h - d0.h).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_LE((d1.xi - A * d0.xi).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_LE((d1.S - d0.S).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_NEAR(d1.J, d0.J, 1e-8);
    }
  }
}

TEST(Blaschke, CatalogResidualsVanish) {
  std::vector<ImmersionSpec> specs;
  for (const char* name : {"ellipsoid", "hyperboloid_sheet", "titeica", "paraboloid", "ma_wedge"}) {
    specs.push_back(sphere_catalog(name).spec);
  }
  specs.push_back(hypersurface_catalog("sphere3"));
  for (const auto& spec : specs) {
    const ResidualReport r = structure_residuals(spec, random_chart_points(spec.chart_box, 10, 10));
    EXPECT_EQ(r.evaluated, 10) << spec.name;
    EXPECT_LE(r.max_residual(), 1e-6) << spec.name;
  }
}
