#pragma once

// Blaschke structure of a nondegenerate, positive definite immersion:
// affine metric h, affine normal xi, shape operator S, difference tensor K
// and the Pick invariant J, plus residuals of the integrability equations.
//
// Everything up to the induced connection is computed in truncated Taylor
// arithmetic from an order-4 jet, so h is known to order 2 and xi, the
// Christoffel symbols and K to order 1 at the base point. Derivatives of S
// would need a fifth-order jet; they are taken by one central-difference
// layer instead.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "affsym/errors.hpp"
#include "affsym/jet.hpp"
#include "affsym/parallel.hpp"
#include "affsym/series.hpp"
#include "affsym/small_matrix.hpp"

namespace affsym {

// (1,2)-tensor in chart components: t[k](i, j) = T^k_{ij}.
using Tensor12 = std::vector<Eigen::MatrixXd>;
using SeriesTensor12 = std::vector<Mat<Series>>;

// Provisional transversal N = scale * (Euclidean cross normal) + sum_i mix[i] F_i.
struct TransversalChoice {
  double scale = 1.0;
  std::vector<double> tangent_mix;
};

struct AffineMetric {
  int n = 0;
  Mat<Series> h;                 // Blaschke metric, order jet.order() - 2
  Eigen::MatrixXd value;         // h at the base point
  Eigen::MatrixXd provisional;   // second fundamental form w.r.t. N
  Eigen::VectorXd transversal;   // N at the base point (before the sign fix)
  int orientation = 1;           // -1 when N had to be flipped
};

struct NormalField {
  std::vector<Series> xi;        // order jet.order() - 3
  Mat<Series> h_inverse;
  SeriesTensor12 gamma_hat;      // Levi-Civita symbols of h
  Eigen::VectorXd value;
  double volume_defect = 0.0;    // | |det(F_1..F_n, xi)| - sqrt(det h) |
};

struct ShapeOperatorResult {
  Eigen::MatrixXd S;             // S(j, i) = S^j_i, column i is S(d_i)
  Eigen::MatrixXd dxi;           // column i is d_i xi
  double normal_leak = 0.0;      // largest xi-component of d_i xi
};

struct DifferenceTensorResult {
  SeriesTensor12 gamma;          // induced connection
  SeriesTensor12 K;
  Tensor12 value;
  double J = 0.0;
  double apolarity = 0.0;
  double asymmetry = 0.0;        // max |C_ijk - C_ikj| of the lowered cubic form
  double metric_consistency = 0.0;
};

struct BlaschkeData {
  int n = 0;
  Eigen::MatrixXd h;
  Eigen::VectorXd xi;
  Eigen::MatrixXd S;
  Tensor12 K;
  double J = 0.0;
  Eigen::MatrixXd dxi;

  double apolarity = 0.0;
  double cubic_asymmetry = 0.0;
  double volume_defect = 0.0;
  double normal_leak = 0.0;
};

namespace detail {

inline Eigen::VectorXd values_of(const std::vector<Series>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].value();
  return out;
}

inline Eigen::MatrixXd values_of(const Mat<Series>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out(r, c) = m(r, c).value();
  }
  return out;
}

inline std::vector<Series> truncated(const std::vector<Series>& v, int order) {
  std::vector<Series> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.truncated(order));
  return out;
}

inline std::vector<Series> derivative(const std::vector<Series>& v, int var) {
  std::vector<Series> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.derivative(var));
  return out;
}

inline Series dot(const std::vector<Series>& a, const std::vector<Series>& b) {
  Series acc = a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

struct TangentFrame {
  std::vector<std::vector<Series>> Fi;                 // order - 1
  std::vector<std::vector<std::vector<Series>>> Fij;   // order - 2
};

inline TangentFrame tangent_frame(const Jet& jet) {
  const int n = jet.domain_dim();
  TangentFrame tf;
  for (int i = 0; i < n; ++i) tf.Fi.push_back(derivative(jet.components(), i));
  tf.Fij.assign(static_cast<std::size_t>(n), std::vector<std::vector<Series>>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      tf.Fij[i][j] = derivative(tf.Fi[static_cast<std::size_t>(i)], j);
      tf.Fij[j][i] = tf.Fij[i][j];
    }
  }
  return tf;
}

// det[F_1, ..., F_n, last] with the columns given as series vectors.
inline Series bracket(const std::vector<std::vector<Series>>& Fi, const std::vector<Series>& last) {
  std::vector<std::vector<Series>> cols = Fi;
  cols.push_back(last);
  return determinant(Mat<Series>::from_columns(cols));
}

// N_k = det[F_1, ..., F_n, e_k]; then det[F_1..F_n, N] = |N|^2 and N is
// Euclidean-orthogonal to the tangent space.
inline std::vector<Series> cross_normal(const std::vector<std::vector<Series>>& Fi) {
  const int n = static_cast<int>(Fi.size());
  const int m = n + 1;
  Mat<Series> tangent = Mat<Series>::from_columns(Fi);
  std::vector<Series> N;
  for (int k = 0; k < m; ++k) {
    Mat<Series> minor(n, n);
    for (int r = 0, rr = 0; r < m; ++r) {
      if (r == k) continue;
      for (int c = 0; c < n; ++c) minor(rr, c) = tangent(r, c);
      ++rr;
    }
    Series cof = determinant(minor);
    N.push_back(((k + n) % 2 == 0) ? cof : -cof);
  }
  return N;
}

}  // namespace detail

inline AffineMetric affine_metric(const Jet& jet, const TransversalChoice& choice = {}) {
  const int n = jet.domain_dim();
  if (jet.order() < 2) throw GeometryError(ErrorCode::OrderUnsupported, "affine metric needs a jet of order >= 2");
  const auto tf = detail::tangent_frame(jet);

  std::vector<Series> N = detail::cross_normal(tf.Fi);
  for (auto& c : N) c *= choice.scale;
  for (std::size_t i = 0; i < choice.tangent_mix.size() && i < tf.Fi.size(); ++i) {
    for (std::size_t c = 0; c < N.size(); ++c) N[c] += choice.tangent_mix[i] * tf.Fi[i][c];
  }
  const Series D = detail::bracket(tf.Fi, N);
  const double tangent_scale = [&] {
    double s = 1.0;
    for (const auto& f : tf.Fi) s *= detail::values_of(f).norm();
    return s;
  }();
  if (!(std::abs(D.value()) > 1e-14 * tangent_scale * detail::values_of(N).norm())) {
    throw GeometryError(ErrorCode::DegenerateSurface, "tangent vectors are linearly dependent");
  }

  AffineMetric out;
  out.n = n;
  Mat<Series> h0(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      h0(i, j) = detail::bracket(tf.Fi, tf.Fij[i][j]) / D;
      h0(j, i) = h0(i, j);
    }
  }
  out.provisional = detail::values_of(h0);
  out.transversal = detail::values_of(N);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.provisional);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  const double bottom = ev.cwiseAbs().minCoeff();
  if (!(top > 0.0) || bottom <= 1e-10 * top) {
    throw GeometryError(ErrorCode::DegenerateSurface, "second fundamental form is degenerate");
  }
  if (ev.minCoeff() < 0.0 && ev.maxCoeff() > 0.0) {
    throw GeometryError(ErrorCode::IndefiniteMetric, "second fundamental form has mixed signature");
  }
  out.orientation = ev.maxCoeff() > 0.0 ? 1 : -1;

  // det_theta(h0) = det(h0) / D^2 for the volume form theta = det(., ..., N).
  Series q = determinant(h0) / (D * D);
  if (q.value() < 0.0) q = -q;
  const Series factor = pow(q, -1.0 / (n + 2)) * static_cast<double>(out.orientation);
  out.h = Mat<Series>(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.h(i, j) = factor * h0(i, j);
  }
  out.value = detail::values_of(out.h);
  return out;
}

inline NormalField blaschke_normal(const Jet& jet, const AffineMetric& metric) {
  const int n = metric.n;
  if (jet.order() < 3) throw GeometryError(ErrorCode::OrderUnsupported, "affine normal needs a jet of order >= 3");
  const int order = jet.order() - 3;
  const auto tf = detail::tangent_frame(jet);

  NormalField out;
  const Series det_h = determinant(metric.h);
  out.h_inverse = inverse(metric.h, det_h);

  // Gamma_hat^k_ij = 1/2 h^kl (d_i h_jl + d_j h_il - d_l h_ij)
  std::vector<Mat<Series>> dh;  // dh[l](i, j) = d_l h_ij
  for (int l = 0; l < n; ++l) {
    Mat<Series> d(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d(i, j) = metric.h(i, j).derivative(l);
    }
    dh.push_back(d);
  }
  out.gamma_hat.assign(static_cast<std::size_t>(n), Mat<Series>(n, n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Series acc(0.0);
        for (int l = 0; l < n; ++l) {
          acc += out.h_inverse(k, l).truncated(order) * (dh[l](i, j) * -1.0 + dh[i](j, l) + dh[j](i, l));
        }
        out.gamma_hat[k](i, j) = 0.5 * acc;
        out.gamma_hat[k](j, i) = out.gamma_hat[k](i, j);
      }
    }
  }

  // xi = (1/n) h^ij (F_ij - Gamma_hat^k_ij F_k)
  const int m = n + 1;
  out.xi.assign(static_cast<std::size_t>(m), Series(0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Series hij = out.h_inverse(i, j).truncated(order);
      for (int c = 0; c < m; ++c) {
        Series hess = tf.Fij[i][j][c].truncated(order);
        for (int k = 0; k < n; ++k) hess -= out.gamma_hat[k](i, j) * tf.Fi[k][c];
        out.xi[c] += hij * hess;
      }
    }
  }
  for (auto& c : out.xi) {
    c /= static_cast<double>(n);
    if (c.vars() == 0) c = Series(n, order, c.value());
  }
  out.value = detail::values_of(out.xi);

  Eigen::MatrixXd B(m, m);
  for (int i = 0; i < n; ++i) B.col(i) = detail::values_of(tf.Fi[i]);
  B.col(n) = out.value;
  out.volume_defect = std::abs(std::abs(B.determinant()) - std::sqrt(metric.value.determinant()));
  return out;
}

inline ShapeOperatorResult shape_operator(const Jet& jet, const NormalField& normal) {
  const int n = jet.domain_dim();
  if (jet.order() < 4) throw GeometryError(ErrorCode::OrderUnsupported, "shape operator needs a jet of order 4");
  const int m = n + 1;
  Eigen::MatrixXd B(m, m);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd col(m);
    for (int c = 0; c < m; ++c) col[c] = jet.components()[static_cast<std::size_t>(c)].derivative(i).value();
    B.col(i) = col;
  }
  B.col(n) = normal.value;

  ShapeOperatorResult out;
  out.dxi.resize(m, n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) out.dxi(c, i) = normal.xi[static_cast<std::size_t>(c)].derivative(i).value();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
  if (diag.minCoeff() <= 1e-12 * diag.maxCoeff()) {
    throw GeometryError(ErrorCode::TangentDecompositionFailure, "tangent basis plus normal is ill-conditioned");
  }
  const Eigen::MatrixXd coeffs = qr.solve(-out.dxi);
  out.S = coeffs.topRows(n);
  out.normal_leak = coeffs.row(n).cwiseAbs().maxCoeff() / std::max(1.0, out.S.cwiseAbs().maxCoeff());
  return out;
}

// sqrt(h^{ij} t_i t_j) for the trace covector t_i = K^j_{ij}: the largest
// |trace K_X| over h-unit X.
inline double apolarity_defect(const Eigen::MatrixXd& h, const Tensor12& K) {
  const int n = static_cast<int>(h.rows());
  Eigen::VectorXd t = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) t[i] += K[static_cast<std::size_t>(j)](i, j);
  }
  return std::sqrt(std::max(0.0, t.dot(h.ldlt().solve(t))));
}

inline DifferenceTensorResult difference_tensor(const Jet& jet, const AffineMetric& metric,
                                                const NormalField& normal) {
  const int n = metric.n;
  const int m = n + 1;
  const int order = jet.order() - 3;
  const auto tf = detail::tangent_frame(jet);

  // F_ij = Gamma^k_ij F_k + h_ij xi, solved with the inverse of [F_1..F_n, xi].
  std::vector<std::vector<Series>> cols;
  for (int i = 0; i < n; ++i) cols.push_back(detail::truncated(tf.Fi[static_cast<std::size_t>(i)], order));
  cols.push_back(normal.xi);
  const Mat<Series> B = Mat<Series>::from_columns(cols);
  const Series det_B = determinant(B);
  if (std::abs(det_B.value()) < 1e-300) {
    throw GeometryError(ErrorCode::TangentDecompositionFailure, "affine normal is tangent");
  }
  const Mat<Series> Binv = inverse(B, det_B);

  DifferenceTensorResult out;
  out.gamma.assign(static_cast<std::size_t>(n), Mat<Series>(n, n));
  out.K.assign(static_cast<std::size_t>(n), Mat<Series>(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int r = 0; r < m; ++r) {
        Series acc(0.0);
        for (int c = 0; c < m; ++c) acc += Binv(r, c) * tf.Fij[i][j][c].truncated(order);
        if (r < n) {
          out.gamma[r](i, j) = acc;
          out.gamma[r](j, i) = acc;
        } else {
          out.metric_consistency =
              std::max(out.metric_consistency, std::abs(acc.value() - metric.value(i, j)));
        }
      }
    }
  }
  out.value.assign(static_cast<std::size_t>(n), Eigen::MatrixXd(n, n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.K[k](i, j) = out.gamma[k](i, j) - normal.gamma_hat[k](i, j);
        out.value[k](i, j) = out.K[k](i, j).value();
      }
    }
  }

  // Lowered cubic form C_ijk = h_kl K^l_ij and J = |C|^2_h / (n(n-1)).
  const Eigen::MatrixXd& h = metric.value;
  const Eigen::MatrixXd hinv = h.inverse();
  std::vector<double> C(static_cast<std::size_t>(n * n * n), 0.0);
  auto at = [n](int i, int j, int k) { return static_cast<std::size_t>((i * n + j) * n + k); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) C[at(i, j, k)] += h(k, l) * out.value[l](i, j);
      }
    }
  }
  double norm2 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        out.asymmetry = std::max(out.asymmetry, std::abs(C[at(i, j, k)] - C[at(i, k, j)]));
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) norm2 += hinv(i, a) * hinv(j, b) * hinv(k, c) * C[at(i, j, k)] * C[at(a, b, c)];
          }
        }
      }
    }
  }
  out.J = norm2 / (n * (n - 1));
  out.apolarity = apolarity_defect(h, out.value);
  return out;
}

// Full expansion at a point, kept around for residual evaluation.
struct BlaschkeExpansion {
  AffineMetric metric;
  NormalField normal;
  DifferenceTensorResult difference;
  BlaschkeData data;
};

namespace detail {

inline BlaschkeExpansion expand_blaschke(const Jet& jet) {
  BlaschkeExpansion e;
  e.metric = affine_metric(jet);
  e.normal = blaschke_normal(jet, e.metric);
  const ShapeOperatorResult shape = shape_operator(jet, e.normal);
  e.difference = difference_tensor(jet, e.metric, e.normal);

  BlaschkeData& d = e.data;
  d.n = jet.domain_dim();
  d.h = e.metric.value;
  d.xi = e.normal.value;
  d.S = shape.S;
  d.K = e.difference.value;
  d.J = e.difference.J;
  d.dxi = shape.dxi;
  d.apolarity = e.difference.apolarity;
  d.cubic_asymmetry = e.difference.asymmetry;
  d.volume_defect = e.normal.volume_defect;
  d.normal_leak = shape.normal_leak;
  return e;
}

}  // namespace detail

inline BlaschkeExpansion blaschke_expansion(const ImmersionSpec& spec, const Eigen::VectorXd& point) {
  return detail::expand_blaschke(jet_eval(spec, point, 4));
}

inline BlaschkeData blaschke_data(const ImmersionSpec& spec, const Eigen::VectorXd& point) {
  return blaschke_expansion(spec, point).data;
}

// ---------------------------------------------------------------------------
// Integrability residuals

struct PointFailure {
  Eigen::VectorXd point;
  ErrorCode code;
  std::string message;
};

struct ResidualReport {
  double gauss_nabla = 0.0;
  double codazzi_S = 0.0;
  double codazzi_K = 0.0;
  double gauss_hat = 0.0;
  double apolarity = 0.0;
  bool definiteness = true;
  int evaluated = 0;
  std::vector<PointFailure> failures;

  double max_residual() const {
    return std::max({gauss_nabla, codazzi_S, codazzi_K, gauss_hat, apolarity});
  }
};

// Hook for detector calibration: replaces S after it is computed, wherever it
// is computed (including the difference stencil for dS).
using ShapeCorruption = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& S, const Eigen::VectorXd& point)>;

struct ResidualOptions {
  double shape_step = 1e-3;  // central difference for dS, with one Richardson level
  ShapeCorruption corrupt_shape;
};

struct PointResiduals {
  double gauss_nabla = 0.0;
  double codazzi_S = 0.0;
  double codazzi_K = 0.0;
  double gauss_hat = 0.0;
  double apolarity = 0.0;
};

namespace detail {

inline Eigen::MatrixXd shape_at(const ImmersionSpec& spec, const Eigen::VectorXd& p, const ResidualOptions& opts) {
  const Jet jet = expand(spec, p, 4);
  const AffineMetric metric = affine_metric(jet);
  const NormalField normal = blaschke_normal(jet, metric);
  Eigen::MatrixXd S = shape_operator(jet, normal).S;
  if (opts.corrupt_shape) S = opts.corrupt_shape(S, p);
  return S;
}

// Max-norm of a tensor with one upper index after moving it to an
// h-orthonormal frame. `t` is indexed [l][i0][i1]...[i_{rank-1}] row-major.
inline double frame_max_norm(const std::vector<double>& t, int rank, int n, const Eigen::MatrixXd& E,
                             const Eigen::MatrixXd& Einv) {
  const std::size_t lower = static_cast<std::size_t>(std::pow(n, rank));
  double worst = 0.0;
  std::vector<int> out_idx(static_cast<std::size_t>(rank + 1), 0);
  const std::size_t total = lower * static_cast<std::size_t>(n);
  for (std::size_t o = 0; o < total; ++o) {
    // decode output multi-index (d; a_0..a_{rank-1})
    std::size_t rem = o;
    for (int q = rank; q >= 0; --q) {
      out_idx[static_cast<std::size_t>(q)] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < total; ++s) {
      if (t[s] == 0.0) continue;
      std::size_t r = s;
      double w = 1.0;
      for (int q = rank; q >= 1; --q) {
        const int i = static_cast<int>(r % static_cast<std::size_t>(n));
        r /= static_cast<std::size_t>(n);
        w *= E(i, out_idx[static_cast<std::size_t>(q)]);
      }
      const int l = static_cast<int>(r);
      w *= Einv(out_idx[0], l);
      acc += w * t[s];
    }
    worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

}  // namespace detail

inline PointResiduals point_residuals(const ImmersionSpec& spec, const Eigen::VectorXd& p,
                                      const ResidualOptions& opts = {}) {
  const int n = spec.domain_dim;
  const BlaschkeExpansion e = detail::expand_blaschke(detail::expand(spec, p, 4));
  const Eigen::MatrixXd& h = e.metric.value;
  Eigen::MatrixXd S = e.data.S;
  if (opts.corrupt_shape) S = opts.corrupt_shape(S, p);

  // dS[b](l, j) = d_b S^l_j
  std::vector<Eigen::MatrixXd> dS;
  for (int b = 0; b < n; ++b) {
    auto central = [&](double step) {
      Eigen::VectorXd plus = p, minus = p;
      plus[b] += step;
      minus[b] -= step;
      return Eigen::MatrixXd((detail::shape_at(spec, plus, opts) - detail::shape_at(spec, minus, opts)) / (2 * step));
    };
    const Eigen::MatrixXd coarse = central(opts.shape_step);
    const Eigen::MatrixXd fine = central(0.5 * opts.shape_step);
    dS.push_back((4.0 * fine - coarse) / 3.0);
  }

  const auto& G = e.difference.gamma;
  const auto& Gh = e.normal.gamma_hat;
  const auto& K = e.difference.K;
  auto g = [&](int l, int i, int j) { return G[l](i, j).value(); };
  auto dg = [&](int b, int l, int i, int j) { return G[l](i, j).derivative(b).value(); };
  auto gh = [&](int l, int i, int j) { return Gh[l](i, j).value(); };
  auto dgh = [&](int b, int l, int i, int j) { return Gh[l](i, j).derivative(b).value(); };
  auto k3 = [&](int l, int i, int j) { return K[l](i, j).value(); };
  auto dk = [&](int b, int l, int i, int j) { return K[l](i, j).derivative(b).value(); };
  const Eigen::MatrixXd hS = h * S;  // hS(k, j) = h(S d_j, d_k)
  auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };

  const std::size_t n4 = static_cast<std::size_t>(n * n * n * n);
  const std::size_t n3 = static_cast<std::size_t>(n * n * n);
  std::vector<double> gauss(n4), gauss_hat(n4), cod_k(n4), cod_s(n3);
  for (int l = 0; l < n; ++l) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          // R(d_i, d_j) d_k, component l, for both connections.
          double R = dg(i, l, j, k) - dg(j, l, i, k);
          double Rh = dgh(i, l, j, k) - dgh(j, l, i, k);
          double comm = 0.0;
          double cov = dk(i, l, j, k) - dk(j, l, i, k);
          for (int q = 0; q < n; ++q) {
            R += g(l, i, q) * g(q, j, k) - g(l, j, q) * g(q, i, k);
            Rh += gh(l, i, q) * gh(q, j, k) - gh(l, j, q) * gh(q, i, k);
            comm += k3(l, i, q) * k3(q, j, k) - k3(l, j, q) * k3(q, i, k);
            // (nabla_hat_i K)^l_jk - (nabla_hat_j K)^l_ik
            cov += gh(l, i, q) * k3(q, j, k) - gh(q, i, j) * k3(l, q, k) - gh(q, i, k) * k3(l, j, q);
            cov -= gh(l, j, q) * k3(q, i, k) - gh(q, j, i) * k3(l, q, k) - gh(q, j, k) * k3(l, i, q);
          }
          const double hSX = h(j, k) * S(l, i) - h(i, k) * S(l, j);
          const double sym = hS(k, j) * delta(l, i) - hS(k, i) * delta(l, j);
          const std::size_t idx = static_cast<std::size_t>(((l * n + i) * n + j) * n + k);
          gauss[idx] = R - hSX;
          gauss_hat[idx] = Rh - (0.5 * (hSX + sym) - comm);
          cod_k[idx] = cov - 0.5 * (hSX - sym);
        }
        // (nabla_i S)^l_j - (nabla_j S)^l_i
        double cs = dS[static_cast<std::size_t>(i)](l, j) - dS[static_cast<std::size_t>(j)](l, i);
        for (int q = 0; q < n; ++q) {
          cs += g(l, i, q) * S(q, j) - g(q, i, j) * S(l, q);
          cs -= g(l, j, q) * S(q, i) - g(q, j, i) * S(l, q);
        }
        cod_s[static_cast<std::size_t>((l * n + i) * n + j)] = cs;
      }
    }
  }

  const Eigen::MatrixXd L = h.llt().matrixL();
  const Eigen::MatrixXd E = L.transpose().inverse();  // columns: h-orthonormal frame
  const Eigen::MatrixXd Einv = L.transpose();

  PointResiduals r;
  r.gauss_nabla = detail::frame_max_norm(gauss, 3, n, E, Einv);
  r.gauss_hat = detail::frame_max_norm(gauss_hat, 3, n, E, Einv);
  r.codazzi_K = detail::frame_max_norm(cod_k, 3, n, E, Einv);
  r.codazzi_S = detail::frame_max_norm(cod_s, 2, n, E, Einv);
  r.apolarity = e.data.apolarity;
  return r;
}

inline ResidualReport structure_residuals(const ImmersionSpec& spec, const std::vector<Eigen::VectorXd>& points,
                                          const ResidualOptions& opts = {}) {
  struct Outcome {
    bool ok = false;
    PointResiduals r;
    PointFailure failure;
  };
  const auto outcomes = parallel_map<Outcome>(points.size(), [&](std::size_t i) {
    Outcome o;
    try {
      if (!spec.chart_box.contains(points[i])) {
        throw GeometryError(ErrorCode::PointOutsideChart, "sample point outside the chart box");
      }
      o.r = point_residuals(spec, points[i], opts);
      o.ok = true;
    } catch (const GeometryError& err) {
      o.failure = {points[i], err.code(), err.what()};
    }
    return o;
  });

  ResidualReport report;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      if (o.failure.code == ErrorCode::IndefiniteMetric) report.definiteness = false;
      report.failures.push_back(o.failure);
      continue;
    }
    ++report.evaluated;
    report.gauss_nabla = std::max(report.gauss_nabla, o.r.gauss_nabla);
    report.codazzi_S = std::max(report.codazzi_S, o.r.codazzi_S);
    report.codazzi_K = std::max(report.codazzi_K, o.r.codazzi_K);
    report.gauss_hat = std::max(report.gauss_hat, o.r.gauss_hat);
    report.apolarity = std::max(report.apolarity, o.r.apolarity);
  }
  return report;
}

}  // namespace affsym
