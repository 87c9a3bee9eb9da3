#pragma once

// Truncated multivariate Taylor series ("jets" in forward-mode AD terms).
//
// A Series in `vars` variables truncated at total degree `order` stores the
// coefficients c_a = (d^a f)(x0) / a! for every multi-index |a| <= order.
// Multi-indices are kept in graded order, so the coefficient table of a
// lower-order series is a prefix of the higher-order one and truncation is a
// resize.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace affsym {

inline constexpr int kMaxSeriesVars = 3;
inline constexpr int kMaxSeriesOrder = 5;

using MultiIndex = std::array<int, kMaxSeriesVars>;

inline int total_degree(const MultiIndex& a) { return a[0] + a[1] + a[2]; }

class MultiIndexTable {
 public:
  struct Product {
    int lhs;
    int rhs;
    int out;
  };

  explicit MultiIndexTable(int vars) : vars_(vars) {
    offsets_.assign(kMaxSeriesOrder + 2, 0);
    for (int d = 0; d <= kMaxSeriesOrder; ++d) {
      offsets_[d] = static_cast<int>(indices_.size());
      append_degree(d);
    }
    offsets_[kMaxSeriesOrder + 1] = static_cast<int>(indices_.size());

    const int n = static_cast<int>(indices_.size());
    raise_.assign(static_cast<std::size_t>(n) * kMaxSeriesVars, -1);
    weight_.resize(n);
    for (int k = 0; k < n; ++k) {
      const MultiIndex& a = indices_[k];
      double w = 1.0;
      for (int v = 0; v < kMaxSeriesVars; ++v) {
        for (int m = 2; m <= a[v]; ++m) w *= m;
      }
      weight_[k] = w;
      for (int v = 0; v < vars_; ++v) {
        MultiIndex b = a;
        ++b[v];
        raise_[static_cast<std::size_t>(k) * kMaxSeriesVars + v] = find(b);
      }
    }

    for (int d = 0; d <= kMaxSeriesOrder; ++d) {
      product_offsets_.push_back(static_cast<int>(products_.size()));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (degree(i) + degree(j) != d) continue;
          MultiIndex s{};
          for (int v = 0; v < kMaxSeriesVars; ++v) s[v] = indices_[i][v] + indices_[j][v];
          products_.push_back({i, j, find(s)});
        }
      }
    }
    product_offsets_.push_back(static_cast<int>(products_.size()));
  }

  int vars() const { return vars_; }
  // Number of coefficients of a series truncated at `order`.
  int size(int order) const { return offsets_[order + 1]; }
  const MultiIndex& index(int k) const { return indices_[k]; }
  int degree(int k) const { return total_degree(indices_[k]); }
  double factorial_weight(int k) const { return weight_[k]; }

  int find(const MultiIndex& a) const {
    const int d = total_degree(a);
    if (d > kMaxSeriesOrder) return -1;
    for (int v = vars_; v < kMaxSeriesVars; ++v) {
      if (a[v] != 0) return -1;
    }
    for (int k = offsets_[d]; k < offsets_[d + 1]; ++k) {
      if (indices_[k] == a) return k;
    }
    return -1;
  }

  // Index of a + e_var, or -1 past the maximal order.
  int raise(int k, int var) const {
    return raise_[static_cast<std::size_t>(k) * kMaxSeriesVars + var];
  }

  std::span<const Product> products(int order) const {
    return {products_.data(), static_cast<std::size_t>(product_offsets_[order + 1])};
  }

  static const MultiIndexTable& get(int vars) {
    static const std::array<MultiIndexTable, kMaxSeriesVars + 1> tables{
        MultiIndexTable(0), MultiIndexTable(1), MultiIndexTable(2), MultiIndexTable(3)};
    assert(vars >= 0 && vars <= kMaxSeriesVars);
    return tables[vars];
  }

 private:
  void append_degree(int d) {
    if (vars_ == 0) {
      if (d == 0) indices_.push_back({0, 0, 0});
      return;
    }
    // Graded reverse-lexicographic enumeration; the first variable varies
    // slowest so (d,0,0) comes first.
    MultiIndex a{};
    enumerate(0, d, a);
  }

  void enumerate(int v, int remaining, MultiIndex& a) {
    if (v == vars_ - 1) {
      a[v] = remaining;
      indices_.push_back(a);
      a[v] = 0;
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      a[v] = k;
      enumerate(v + 1, remaining - k, a);
    }
    a[v] = 0;
  }

  int vars_;
  std::vector<MultiIndex> indices_;
  std::vector<int> offsets_;
  std::vector<int> raise_;
  std::vector<double> weight_;
  std::vector<Product> products_;
  std::vector<int> product_offsets_;
};

class Series {
 public:
  // A default series is the constant 0; a series with vars() == 0 broadcasts
  // against any other series in arithmetic.
  Series() : Series(0, 0, 0.0) {}
  explicit Series(double value) : Series(0, 0, value) {}

  Series(int vars, int order, double value = 0.0) : vars_(vars), order_(order) {
    if (vars < 0 || vars > kMaxSeriesVars) throw std::invalid_argument("Series: bad variable count");
    if (order < 0 || order > kMaxSeriesOrder) throw std::invalid_argument("Series: bad order");
    c_.assign(static_cast<std::size_t>(table().size(order_)), 0.0);
    c_[0] = value;
  }

  // The coordinate function x_var expanded around `at`.
  static Series variable(int vars, int order, int var, double at) {
    Series s(vars, order, at);
    if (order >= 1) s.c_[static_cast<std::size_t>(var) + 1] = 1.0;
    return s;
  }

  int vars() const { return vars_; }
  int order() const { return order_; }
  double value() const { return c_[0]; }
  bool is_constant() const { return vars_ == 0 || order_ == 0; }

  std::span<const double> coefficients() const { return c_; }
  double coefficient(int k) const { return c_[static_cast<std::size_t>(k)]; }
  double& coefficient(int k) { return c_[static_cast<std::size_t>(k)]; }

  // d^a f at the expansion point.
  double partial(const MultiIndex& a) const {
    const int k = table().find(a);
    if (k < 0 || table().degree(k) > order_) throw std::out_of_range("Series: partial beyond order");
    return c_[static_cast<std::size_t>(k)] * table().factorial_weight(k);
  }

  Series derivative(int var) const {
    if (order_ == 0) throw std::logic_error("Series: derivative of an order-0 series");
    assert(var >= 0 && var < vars_);
    Series d(vars_, order_ - 1);
    const auto& t = table();
    for (int k = 0; k < t.size(order_ - 1); ++k) {
      const int up = t.raise(k, var);
      d.c_[static_cast<std::size_t>(k)] =
          c_[static_cast<std::size_t>(up)] * static_cast<double>(t.index(k)[var] + 1);
    }
    return d;
  }

  Series truncated(int order) const {
    Series s = *this;
    if (order < order_) {
      s.order_ = order;
      s.c_.resize(static_cast<std::size_t>(table().size(order)));
    }
    return s;
  }

  // sum_k coeffs[k] (x - x0)^k, i.e. composition with a univariate function
  // whose Taylor coefficients at x0 = value() are given.
  Series compose(std::span<const double> coeffs) const {
    Series delta = *this;
    delta.c_[0] = 0.0;
    const int top = std::min<int>(order_, static_cast<int>(coeffs.size()) - 1);
    Series acc(vars_, order_, coeffs[static_cast<std::size_t>(top)]);
    for (int k = top - 1; k >= 0; --k) {
      acc = acc * delta;
      acc.c_[0] += coeffs[static_cast<std::size_t>(k)];
    }
    return acc;
  }

  Series operator-() const {
    Series s = *this;
    for (double& c : s.c_) c = -c;
    return s;
  }

  Series& operator+=(double v) {
    c_[0] += v;
    return *this;
  }
  Series& operator-=(double v) {
    c_[0] -= v;
    return *this;
  }
  Series& operator*=(double v) {
    for (double& c : c_) c *= v;
    return *this;
  }
  Series& operator/=(double v) {
    for (double& c : c_) c /= v;
    return *this;
  }

  Series& operator+=(const Series& o) { return accumulate(o, 1.0); }
  Series& operator-=(const Series& o) { return accumulate(o, -1.0); }
  Series& operator*=(const Series& o) {
    *this = *this * o;
    return *this;
  }
  Series& operator/=(const Series& o);

  friend Series operator*(const Series& a, const Series& b) {
    if (b.vars_ == 0) return scaled(a, b.c_[0]);
    if (a.vars_ == 0) return scaled(b, a.c_[0]);
    assert(a.vars_ == b.vars_);
    const int order = std::min(a.order_, b.order_);
    Series r(a.vars_, order);
    for (const auto& p : a.table().products(order)) {
      r.c_[static_cast<std::size_t>(p.out)] +=
          a.c_[static_cast<std::size_t>(p.lhs)] * b.c_[static_cast<std::size_t>(p.rhs)];
    }
    return r;
  }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator+(Series a, double v) { return a += v; }
  friend Series operator+(double v, Series a) { return a += v; }
  friend Series operator-(Series a, double v) { return a -= v; }
  friend Series operator-(double v, const Series& a) { return (-a) += v; }
  friend Series operator*(Series a, double v) { return a *= v; }
  friend Series operator*(double v, Series a) { return a *= v; }
  friend Series operator/(Series a, double v) { return a /= v; }
  friend Series operator/(const Series& a, const Series& b);
  friend Series operator/(double v, const Series& b);

 private:
  const MultiIndexTable& table() const { return MultiIndexTable::get(vars_); }

  static Series scaled(Series s, double v) { return s *= v; }

  Series& accumulate(const Series& o, double sign) {
    if (o.vars_ == 0) {
      c_[0] += sign * o.c_[0];
      return *this;
    }
    if (vars_ == 0) {
      const double base = c_[0];
      *this = o;
      if (sign < 0) *this = -*this;
      c_[0] += base;
      return *this;
    }
    assert(vars_ == o.vars_);
    if (o.order_ < order_) {
      order_ = o.order_;
      c_.resize(o.c_.size());
    }
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += sign * o.c_[k];
    return *this;
  }

  int vars_;
  int order_;
  std::vector<double> c_;
};

inline Series reciprocal(const Series& x) {
  const double x0 = x.value();
  if (x0 == 0.0) throw std::domain_error("Series: reciprocal of a series with zero constant term");
  std::array<double, kMaxSeriesOrder + 1> c{};
  double p = 1.0 / x0;
  for (int k = 0; k <= kMaxSeriesOrder; ++k) {
    c[static_cast<std::size_t>(k)] = (k % 2 == 0 ? p : -p);
    p /= x0;
  }
  return x.compose(c);
}

inline Series operator/(const Series& a, const Series& b) {
  if (b.vars() == 0) return a / b.value();
  return a * reciprocal(b);
}

inline Series operator/(double v, const Series& b) { return v * reciprocal(b); }

inline Series& Series::operator/=(const Series& o) {
  *this = *this / o;
  return *this;
}

inline Series exp(const Series& x) {
  std::array<double, kMaxSeriesOrder + 1> c{};
  double e = std::exp(x.value());
  double fact = 1.0;
  for (int k = 0; k <= kMaxSeriesOrder; ++k) {
    if (k > 0) fact *= k;
    c[static_cast<std::size_t>(k)] = e / fact;
  }
  return x.compose(c);
}

inline Series log(const Series& x) {
  const double x0 = x.value();
  if (!(x0 > 0.0)) throw std::domain_error("Series: log of a non-positive series");
  std::array<double, kMaxSeriesOrder + 1> c{};
  c[0] = std::log(x0);
  double p = 1.0;
  for (int k = 1; k <= kMaxSeriesOrder; ++k) {
    p /= x0;
    c[static_cast<std::size_t>(k)] = (k % 2 == 1 ? 1.0 : -1.0) * p / k;
  }
  return x.compose(c);
}

inline Series pow(const Series& x, double r) {
  const double x0 = x.value();
  if (!(x0 > 0.0)) throw std::domain_error("Series: pow of a non-positive series");
  std::array<double, kMaxSeriesOrder + 1> c{};
  double binom = 1.0;
  for (int k = 0; k <= kMaxSeriesOrder; ++k) {
    if (k > 0) binom *= (r - (k - 1)) / k;
    c[static_cast<std::size_t>(k)] = binom * std::pow(x0, r - k);
  }
  return x.compose(c);
}

inline Series sqrt(const Series& x) { return pow(x, 0.5); }

namespace detail {
// Taylor coefficients of a function whose derivatives cycle with period 4
// (sin, cos) or 2 (sinh, cosh).
inline Series cyclic(const Series& x, const std::array<double, 4>& derivs) {
  std::array<double, kMaxSeriesOrder + 1> c{};
  double fact = 1.0;
  for (int k = 0; k <= kMaxSeriesOrder; ++k) {
    if (k > 0) fact *= k;
    c[static_cast<std::size_t>(k)] = derivs[static_cast<std::size_t>(k % 4)] / fact;
  }
  return x.compose(c);
}
}  // namespace detail

inline Series sin(const Series& x) {
  const double s = std::sin(x.value()), co = std::cos(x.value());
  return detail::cyclic(x, {s, co, -s, -co});
}
inline Series cos(const Series& x) {
  const double s = std::sin(x.value()), co = std::cos(x.value());
  return detail::cyclic(x, {co, -s, -co, s});
}
inline Series sinh(const Series& x) {
  const double s = std::sinh(x.value()), ch = std::cosh(x.value());
  return detail::cyclic(x, {s, ch, s, ch});
}
inline Series cosh(const Series& x) {
  const double s = std::sinh(x.value()), ch = std::cosh(x.value());
  return detail::cyclic(x, {ch, s, ch, s});
}

}  // namespace affsym
