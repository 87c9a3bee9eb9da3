#include <gtest/gtest.h>

#include <cmath>

#include "affsym/series.hpp"

using namespace affsym;

namespace {

double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

}  // namespace

TEST(MultiIndexTable, SizesMatchBinomialCounts) {
  // number of monomials of degree <= k in v variables is C(k + v, v)
  const auto& t2 = MultiIndexTable::get(2);
  const auto& t3 = MultiIndexTable::get(3);
  EXPECT_EQ(t2.size(4), 15);
  EXPECT_EQ(t3.size(4), 35);
  EXPECT_EQ(t3.size(5), 56);
  EXPECT_EQ(t3.size(0), 1);
}

TEST(MultiIndexTable, LowerOrdersArePrefixes) {
  const auto& t = MultiIndexTable::get(3);
  for (int k = 0; k < t.size(5); ++k) {
    EXPECT_LE(t.degree(k), 5);
    if (k > 0) EXPECT_GE(t.degree(k), t.degree(k - 1));
    EXPECT_EQ(t.find(t.index(k)), k);
  }
}

TEST(Series, ExpOfSumHasFactorialCoefficients) {
  const Series u = Series::variable(2, 5, 0, 0.3);
  const Series v = Series::variable(2, 5, 1, -0.2);
  const Series e = exp(u + v);
  const auto& t = MultiIndexTable::get(2);
  for (int k = 0; k < t.size(5); ++k) {
    const auto& a = t.index(k);
    EXPECT_NEAR(e.coefficient(k), std::exp(0.1) / (fact(a[0]) * fact(a[1])), 1e-14);
  }
}

TEST(Series, PartialsMatchClosedForm) {
  // f = sin(u) * cos(v) * exp(w); d^(1,2,1) f = cos(u) * cos(v) * (-1) ... evaluate directly
  const double u0 = 0.4, v0 = -0.7, w0 = 0.2;
  const Series u = Series::variable(3, 4, 0, u0);
  const Series v = Series::variable(3, 4, 1, v0);
  const Series w = Series::variable(3, 4, 2, w0);
  const Series f = sin(u) * cos(v) * exp(w);
  EXPECT_NEAR(f.partial({1, 2, 1}), std::cos(u0) * (-std::cos(v0)) * std::exp(w0), 1e-13);
  EXPECT_NEAR(f.partial({3, 0, 1}), -std::cos(u0) * std::cos(v0) * std::exp(w0), 1e-13);
  EXPECT_NEAR(f.partial({0, 1, 3}), std::sin(u0) * (-std::sin(v0)) * std::exp(w0), 1e-13);
}

TEST(Series, ReciprocalAndDivisionInvert) {
  const Series u = Series::variable(2, 4, 0, 0.5);
  const Series v = Series::variable(2, 4, 1, 1.5);
  const Series x = u * u + 2.0 * v + 1.0;
  const Series one = x * reciprocal(x);
  EXPECT_NEAR(one.coefficient(0), 1.0, 1e-15);
  for (int k = 1; k < MultiIndexTable::get(2).size(4); ++k) EXPECT_NEAR(one.coefficient(k), 0.0, 1e-13);
  const Series q = (x * v) / x;
  for (int k = 0; k < MultiIndexTable::get(2).size(4); ++k) EXPECT_NEAR(q.coefficient(k), v.coefficient(k), 1e-13);
}

TEST(Series, SqrtSquaresBackAndPowMatchesLogExp) {
  const Series u = Series::variable(1, 5, 0, 2.0);
  const Series s = sqrt(u);
  const Series back = s * s;
  for (int k = 0; k <= 5; ++k) EXPECT_NEAR(back.coefficient(k), u.coefficient(k), 1e-14);
  const Series p = pow(u, 1.0 / 3.0);
  const Series q = exp(log(u) / 3.0);
  for (int k = 0; k <= 5; ++k) EXPECT_NEAR(p.coefficient(k), q.coefficient(k), 1e-14);
}

TEST(Series, HyperbolicIdentity) {
  const Series t = Series::variable(1, 5, 0, 0.8);
  const Series d = cosh(t) * cosh(t) - sinh(t) * sinh(t);
  EXPECT_NEAR(d.coefficient(0), 1.0, 1e-14);
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(d.coefficient(k), 0.0, 1e-13);
}

TEST(Series, DerivativeLowersOrder) {
  const Series u = Series::variable(2, 4, 0, 0.1);
  const Series v = Series::variable(2, 4, 1, 0.2);
  const Series f = u * u * v;
  const Series fu = f.derivative(0);
  EXPECT_EQ(fu.order(), 3);
  EXPECT_NEAR(fu.value(), 2 * 0.1 * 0.2, 1e-15);
  EXPECT_NEAR(fu.partial({1, 0}), 2 * 0.2, 1e-15);
  EXPECT_NEAR(fu.partial({1, 1}), 2.0, 1e-15);
  EXPECT_THROW(Series(2, 0, 1.0).derivative(0), std::exception);
}

TEST(Series, ScalarSeriesBroadcast) {
  const Series u = Series::variable(3, 2, 2, 1.0);
  const Series c(4.0);
  const Series s = c + u;
  EXPECT_EQ(s.vars(), 3);
  EXPECT_NEAR(s.value(), 5.0, 0.0);
  EXPECT_NEAR(s.partial({0, 0, 1}), 1.0, 0.0);
  const Series m = c * u;
  EXPECT_NEAR(m.partial({0, 0, 1}), 4.0, 0.0);
}
