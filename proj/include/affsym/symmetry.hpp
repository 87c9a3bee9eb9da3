#pragma once

// Canonical frame, structure scalars and pointwise symmetry labels for
// 3-dimensional positive definite Blaschke hypersurfaces.
//
// In the canonical h-orthonormal frame {e1, e2, e3}:
//   K_{e1} = diag(2 mu1, -mu1, -mu1)
//   K_{e2} = [[0, -mu1, 0], [-mu1, mu2, 0], [0, 0, -mu2]]
//   K_{e3} = [[0, 0, -mu1], [0, 0, -mu2], [-mu1, -mu2, 0]]
//   S      = diag(lambda, a, a)
// with mu1 > 0 and mu2 >= 0.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "affsym/blaschke.hpp"
#include "affsym/errors.hpp"
#include "affsym/jet.hpp"
#include "affsym/sym_eig3.hpp"

namespace affsym {

enum class SymmetryGroup { SO2, Z3, NotApplicable };
enum class NuCase { Case1, Case2, Case3 };

inline std::string to_string(SymmetryGroup g) {
  switch (g) {
    case SymmetryGroup::SO2: return "SO2";
    case SymmetryGroup::Z3: return "Z3";
    case SymmetryGroup::NotApplicable: return "NotApplicable";
  }
  return "?";
}

inline std::string to_string(NuCase c) {
  switch (c) {
    case NuCase::Case1: return "Case1";
    case NuCase::Case2: return "Case2";
    case NuCase::Case3: return "Case3";
  }
  return "?";
}

// Template tensors of the canonical form, in the canonical frame.
inline Tensor12 canonical_K(double mu1, double mu2) {
  Tensor12 K(3, Eigen::MatrixXd::Zero(3, 3));
  // K[l](i, j) = component l of K(e_i, e_j)
  auto set = [&](int i, int j, int l, double v) {
    K[static_cast<std::size_t>(l)](i, j) = v;
    K[static_cast<std::size_t>(l)](j, i) = v;
  };
  set(0, 0, 0, 2 * mu1);
  set(1, 1, 0, -mu1);
  set(2, 2, 0, -mu1);
  set(0, 1, 1, -mu1);
  set(0, 2, 2, -mu1);
  set(1, 1, 1, mu2);
  set(2, 2, 1, -mu2);
  set(1, 2, 2, -mu2);
  return K;
}

inline Eigen::MatrixXd canonical_S(double lambda, double a) {
  return Eigen::Vector3d(lambda, a, a).asDiagonal();
}

// Change of basis: tensors given in chart components are re-expressed in the
// basis whose vectors are the columns of P (chart components).
inline Eigen::MatrixXd in_basis(const Eigen::MatrixXd& S, const Eigen::MatrixXd& P) {
  return P.inverse() * S * P;
}

inline Tensor12 in_basis(const Tensor12& K, const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  const Eigen::MatrixXd Pinv = P.inverse();
  Tensor12 out(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
  for (int l = 0; l < n; ++l) {
    for (int m = 0; m < n; ++m) {
      if (Pinv(l, m) == 0.0) continue;
      out[static_cast<std::size_t>(l)] += Pinv(l, m) * (P.transpose() * K[static_cast<std::size_t>(m)] * P);
    }
  }
  return out;
}

// Ricci tensor of the affine metric from the Gauss equation
//   R(X,Y)Z = 1/2 (h(Y,Z)SX - h(X,Z)SY + h(SY,Z)X - h(SX,Z)Y) - [K_X, K_Y]Z,
// traced as Ric(Y,Z) = sum_l [R(d_l, Y)Z]^l. Lower-index components.
inline Eigen::MatrixXd ricci_hat(const Eigen::MatrixXd& h, const Eigen::MatrixXd& S, const Tensor12& K) {
  const int n = static_cast<int>(h.rows());
  const Eigen::MatrixXd hS = h * S;  // hS(k, j) = h(S d_j, d_k)
  auto k3 = [&](int l, int i, int j) { return K[static_cast<std::size_t>(l)](i, j); };
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
  for (int y = 0; y < n; ++y) {
    for (int z = 0; z < n; ++z) {
      double acc = 0.0;
      for (int l = 0; l < n; ++l) {
        // X = d_l, component l
        acc += 0.5 * (h(y, z) * S(l, l) - h(l, z) * S(l, y) + hS(z, y) - hS(z, l) * (l == y ? 1.0 : 0.0));
        for (int q = 0; q < n; ++q) acc -= k3(l, l, q) * k3(q, y, z) - k3(l, y, q) * k3(q, l, z);
      }
      ric(y, z) = acc;
    }
  }
  return ric;
}

// Closed form of the affine-metric Ricci tensor in the canonical frame.
inline Eigen::MatrixXd ricci_hat_canonical(double mu1, double mu2, double a, double lambda) {
  const double r11 = (a + lambda) + 6 * mu1 * mu1;
  const double r22 = 1.5 * a + 0.5 * lambda + 2 * (mu1 * mu1 + mu2 * mu2);
  return Eigen::Vector3d(r11, r22, r22).asDiagonal();
}

// Rotation in the e2e3-plane that makes C(e2,e2,e3) vanish with C(e2,e2,e2) >= 0.
inline double rotation_angle(double nu1, double nu2) { return std::atan2(nu2, nu1) / 3.0; }

enum class AxisSource { RicciEndomorphism, ShapeOperator };

struct CanonicalFrame {
  Eigen::Vector3d e1, e2, e3;  // chart components
  double theta = 0.0;
  double nu1 = 0.0, nu2 = 0.0;

  double mu1 = 0.0, mu2 = 0.0, lambda = 0.0, a = 0.0;
  double J = 0.0;
  double canonical_residual = 0.0;
  AxisSource axis = AxisSource::RicciEndomorphism;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d P;
    P << e1, e2, e3;
    return P;
  }
  double scale() const { return std::sqrt(mu1 * mu1 + mu2 * mu2 + J); }
};

struct FrameOptions {
  double axis_gap = 1e-7;    // relative eigen-gap below which an axis is not trusted
  double planar_noise = 1e-6;  // relative |(nu1, nu2)| treated as zero (SO(2) point)
};

namespace detail {

struct IsolatedAxis {
  Eigen::Vector3d axis;
  double gap = 0.0;  // relative
};

// Eigenvector of the eigenvalue that is separated from the other two.
inline IsolatedAxis isolated_axis(const Eigen::Matrix3d& m) {
  const SymEigen3 eig = sym_eig3(SymMatrix3::from_dense(m));
  const double top = eig.values.cwiseAbs().maxCoeff();
  const double upper = eig.values[0] - eig.values[1];
  const double lower = eig.values[1] - eig.values[2];
  IsolatedAxis out;
  if (!(top > 0.0)) return out;
  if (upper >= lower) {
    out.axis = eig.vectors.col(0);
    out.gap = (upper - lower) / top;
  } else {
    out.axis = eig.vectors.col(2);
    out.gap = (lower - upper) / top;
  }
  return out;
}

inline double cubic(const Tensor12& K, const Eigen::Vector3d& x, const Eigen::Vector3d& y, const Eigen::Vector3d& z) {
  // C(x, y, z) = h(K(x, y), z) in an orthonormal basis
  double acc = 0.0;
  for (int l = 0; l < 3; ++l) acc += z[l] * x.dot(K[static_cast<std::size_t>(l)] * y);
  return acc;
}

}  // namespace detail

// Frame from h, S, K at a point (chart components). The returned vectors are
// h-orthonormal chart vectors.
inline CanonicalFrame canonical_frame(const Eigen::MatrixXd& h, const Eigen::MatrixXd& S, const Tensor12& K,
                                      const FrameOptions& opts = {}) {
  if (h.rows() != 3) throw GeometryError(ErrorCode::AmbiguousAxis, "canonical frame needs a 3-dimensional point");
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) throw GeometryError(ErrorCode::IndefiniteMetric, "metric is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::Matrix3d E = L.transpose().inverse();  // orthonormal basis, chart components

  Eigen::Matrix3d So = in_basis(S, E);
  So = 0.5 * (So + So.transpose()).eval();
  const Tensor12 Ko = in_basis(K, E);
  const Eigen::Matrix3d ric = ricci_hat(Eigen::MatrixXd::Identity(3, 3), So, Ko);

  const auto by_ricci = detail::isolated_axis(ric);
  const auto by_shape = detail::isolated_axis(So);
  if (std::max(by_ricci.gap, by_shape.gap) < opts.axis_gap) {
    throw GeometryError(ErrorCode::AmbiguousAxis, "no isolated eigendirection of the Ricci endomorphism or S");
  }
  CanonicalFrame f;
  Eigen::Vector3d e1;
  if (by_ricci.gap >= by_shape.gap) {
    e1 = by_ricci.axis;
    f.axis = AxisSource::RicciEndomorphism;
  } else {
    e1 = by_shape.axis;
    f.axis = AxisSource::ShapeOperator;
  }
  e1.normalize();
  if (detail::cubic(Ko, e1, e1, e1) < 0.0) e1 = -e1;

  int best = 0;
  double best_norm = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double norm = (Eigen::Vector3d::Unit(k) - e1[k] * e1).norm();
    if (norm > best_norm + 1e-12) {
      best = k;
      best_norm = norm;
    }
  }
  const Eigen::Vector3d u2 = (Eigen::Vector3d::Unit(best) - e1[best] * e1).normalized();
  const Eigen::Vector3d u3 = e1.cross(u2);

  f.mu1 = 0.5 * detail::cubic(Ko, e1, e1, e1);
  f.nu1 = detail::cubic(Ko, u2, u2, u2);
  f.nu2 = detail::cubic(Ko, u2, u2, u3);

  double norm2 = 0.0;
  for (const auto& m : Ko) norm2 += m.squaredNorm();
  f.J = norm2 / 6.0;
  const double scale = std::sqrt(f.mu1 * f.mu1 + f.J);
  f.theta = std::hypot(f.nu1, f.nu2) <= opts.planar_noise * scale ? 0.0 : rotation_angle(f.nu1, f.nu2);

  const Eigen::Vector3d e2 = std::cos(f.theta) * u2 + std::sin(f.theta) * u3;
  const Eigen::Vector3d e3 = -std::sin(f.theta) * u2 + std::cos(f.theta) * u3;
  f.mu2 = detail::cubic(Ko, e2, e2, e2);
  f.lambda = e1.dot(So * e1);
  f.a = 0.5 * (e2.dot(So * e2) + e3.dot(So * e3));

  Eigen::Matrix3d P;
  P << e1, e2, e3;
  const Tensor12 Kc = in_basis(Ko, P);
  const Eigen::MatrixXd Sc = P.transpose() * So * P;
  const Tensor12 Kt = canonical_K(f.mu1, f.mu2);
  const Eigen::MatrixXd St = canonical_S(f.lambda, f.a);
  double residual = (Sc - St).cwiseAbs().maxCoeff();
  for (int l = 0; l < 3; ++l) {
    residual = std::max(residual, (Kc[static_cast<std::size_t>(l)] - Kt[static_cast<std::size_t>(l)]).cwiseAbs().maxCoeff());
  }
  f.canonical_residual = residual;

  f.e1 = E * e1;
  f.e2 = E * e2;
  f.e3 = E * e3;
  return f;
}

inline CanonicalFrame canonical_frame(const BlaschkeData& d, const FrameOptions& opts = {}) {
  return canonical_frame(d.h, d.S, d.K, opts);
}

// ---------------------------------------------------------------------------
// Connection coefficients of the affine metric in the canonical frame field.

struct ConnectionScalars {
  // gamma[i][j][k] = h(nabla_hat_{e_{i+1}} e_{j+1}, e_{k+1})
  std::array<std::array<std::array<double, 3>, 3>, 3> gamma{};
  double eta = 0.0;
  CanonicalFrame frame;
  double frame_jump = 0.0;  // largest h-distance between aligned neighbor frames and the center

  double at(int i, int j, int k) const {
    return gamma[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k - 1)];
  }
};

struct PatchOptions {
  double step = 1e-3;
  double max_jump = 0.05;
  FrameOptions frame;
};

namespace detail {

inline CanonicalFrame frame_near(const ImmersionSpec& spec, const Eigen::VectorXd& q, const FrameOptions& opts) {
  return canonical_frame(expand_blaschke(expand(spec, q, 4)).data, opts);
}

// Re-gauges a neighbor frame so it is continuous with the center frame: the
// three-fold rotations for Z3 points, projection of the center e2 for SO(2)
// points. Returns the h-distance of the aligned frame from the center.
inline double align(CanonicalFrame& f, const CanonicalFrame& center, const Eigen::Matrix3d& h, bool planar) {
  auto hdot = [&](const Eigen::Vector3d& x, const Eigen::Vector3d& y) { return x.dot(h * y); };
  if (planar) {
    Eigen::Vector3d e2 = center.e2 - hdot(center.e2, f.e1) * f.e1;
    e2 /= std::sqrt(hdot(e2, e2));
    Eigen::Vector3d e3 = center.e3 - hdot(center.e3, f.e1) * f.e1 - hdot(center.e3, e2) * e2;
    e3 /= std::sqrt(hdot(e3, e3));
    f.e2 = e2;
    f.e3 = e3;
  } else {
    double best = -2.0;
    Eigen::Vector3d e2 = f.e2, e3 = f.e3;
    for (int m = 0; m < 3; ++m) {
      const double ang = 2.0 * std::numbers::pi * m / 3.0;
      const Eigen::Vector3d c2 = std::cos(ang) * f.e2 + std::sin(ang) * f.e3;
      const Eigen::Vector3d c3 = -std::sin(ang) * f.e2 + std::cos(ang) * f.e3;
      const double score = hdot(c2, center.e2);
      if (score > best) {
        best = score;
        e2 = c2;
        e3 = c3;
      }
    }
    f.e2 = e2;
    f.e3 = e3;
  }
  double jump = 0.0;
  for (const auto& d : {f.e1 - center.e1, f.e2 - center.e2, f.e3 - center.e3}) {
    jump = std::max(jump, std::sqrt(std::max(0.0, hdot(d, d))));
  }
  return jump;
}

}  // namespace detail

inline ConnectionScalars connection_scalars(const ImmersionSpec& spec, const Eigen::VectorXd& point,
                                            const PatchOptions& opts = {}) {
  if (spec.domain_dim != 3) throw GeometryError(ErrorCode::AmbiguousAxis, "connection scalars need n = 3");
  const BlaschkeExpansion center_exp = detail::expand_blaschke(jet_eval(spec, point, 4));
  const Eigen::Matrix3d h = center_exp.data.h;
  ConnectionScalars out;
  out.frame = canonical_frame(center_exp.data, opts.frame);
  const CanonicalFrame& c = out.frame;
  const bool planar = std::abs(c.mu2) <= opts.frame.planar_noise * c.scale();

  // dframe[b].col(j) = d_b e_{j+1}
  std::array<Eigen::Matrix3d, 3> dframe;
  for (int b = 0; b < 3; ++b) {
    auto central = [&](double step) {
      Eigen::VectorXd plus = point, minus = point;
      plus[b] += step;
      minus[b] -= step;
      CanonicalFrame fp = detail::frame_near(spec, plus, opts.frame);
      CanonicalFrame fm = detail::frame_near(spec, minus, opts.frame);
      out.frame_jump = std::max(out.frame_jump, detail::align(fp, c, h, planar));
      out.frame_jump = std::max(out.frame_jump, detail::align(fm, c, h, planar));
      return Eigen::Matrix3d((fp.matrix() - fm.matrix()) / (2 * step));
    };
    const Eigen::Matrix3d coarse = central(opts.step);
    const Eigen::Matrix3d fine = central(0.5 * opts.step);
    dframe[static_cast<std::size_t>(b)] = (4.0 * fine - coarse) / 3.0;
  }
  if (out.frame_jump > opts.max_jump) {
    throw GeometryError(ErrorCode::FrameNotDifferentiable, "canonical frame jumps between neighboring samples");
  }

  const auto& gh = center_exp.normal.gamma_hat;
  const Eigen::Matrix3d P = c.matrix();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      // nabla_hat_{e_i} e_j in chart components
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      for (int b = 0; b < 3; ++b) {
        const double eib = P(b, i);
        Eigen::Vector3d term = dframe[static_cast<std::size_t>(b)].col(j);
        for (int a = 0; a < 3; ++a) {
          for (int q = 0; q < 3; ++q) term[a] += gh[a](b, q).value() * P(q, j);
        }
        v += eib * term;
      }
      for (int k = 0; k < 3; ++k) {
        out.gamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            v.dot(h * P.col(k));
      }
    }
  }
  out.eta = out.at(2, 1, 2);
  return out;
}

// ---------------------------------------------------------------------------

inline NuCase nu_case(double a, double eta, double mu1) {
  const double tol = 1e-6 * (1.0 + std::abs(a) + eta * eta + mu1 * mu1);
  const double nu = a + eta * eta - mu1 * mu1;
  if (std::abs(nu) > tol) return NuCase::Case1;
  if (std::abs(mu1 - eta) > tol) return NuCase::Case2;
  return NuCase::Case3;
}

struct SymmetryReport {
  SymmetryGroup group = SymmetryGroup::NotApplicable;
  std::string reason;
  double mu1 = 0.0, mu2 = 0.0, lambda = 0.0, a = 0.0, J = 0.0;
  std::optional<double> eta;
  std::optional<double> nu;
  CanonicalFrame frame;
  double canonical_residual = 0.0;

  std::string label() const {
    if (group == SymmetryGroup::NotApplicable) return "NotApplicable(" + reason + ")";
    return to_string(group);
  }
  std::optional<NuCase> nu_class() const {
    if (!eta) return std::nullopt;
    return nu_case(a, *eta, mu1);
  }
};

struct ClassifyOptions {
  double rel_tol = 1e-6;
  bool with_patch = true;
  PatchOptions patch;
};

inline SymmetryReport classify_frame(const CanonicalFrame& f, const Eigen::MatrixXd& S, double rel_tol) {
  SymmetryReport r;
  r.frame = f;
  r.mu1 = f.mu1;
  r.mu2 = f.mu2;
  r.lambda = f.lambda;
  r.a = f.a;
  r.J = f.J;
  r.canonical_residual = f.canonical_residual;
  const double scale = f.scale();
  const double s_size = S.cwiseAbs().maxCoeff();
  if (scale <= rel_tol * s_size + 1e-12) {
    r.reason = "mu1=0";  // K vanishes: quadric point
  } else if (f.canonical_residual > rel_tol * (scale + s_size)) {
    r.reason = "no-symmetry";
  } else if (std::abs(f.mu2) > rel_tol * scale) {
    r.group = SymmetryGroup::Z3;
  } else if (std::abs(f.mu1) > rel_tol * scale) {
    r.group = SymmetryGroup::SO2;
  } else {
    r.reason = "mu1=0";
  }
  return r;
}

inline std::string not_applicable_reason(ErrorCode code) {
  switch (code) {
    case ErrorCode::AmbiguousAxis: return "mu1=0";
    case ErrorCode::DegenerateSurface: return "degenerate";
    case ErrorCode::IndefiniteMetric: return "indefinite";
    default: return std::string(to_string(code));
  }
}

inline SymmetryReport classify_point(const ImmersionSpec& spec, const Eigen::VectorXd& point,
                                     const ClassifyOptions& opts = {}) {
  SymmetryReport r;
  if (spec.domain_dim != 3) {
    r.reason = "dimension";
    return r;
  }
  try {
    const BlaschkeData d = blaschke_data(spec, point);
    r = classify_frame(canonical_frame(d, opts.patch.frame), d.S, opts.rel_tol);
    if (r.group == SymmetryGroup::NotApplicable || !opts.with_patch) return r;
    const ConnectionScalars cs = connection_scalars(spec, point, opts.patch);
    r.eta = cs.eta;
    r.nu = r.a + cs.eta * cs.eta - r.mu1 * r.mu1;
  } catch (const GeometryError& err) {
    if (err.code() == ErrorCode::PointOutsideChart || err.code() == ErrorCode::OrderUnsupported) throw;
    r.group = SymmetryGroup::NotApplicable;
    r.reason = not_applicable_reason(err.code());
    r.eta.reset();
    r.nu.reset();
  }
  return r;
}

}  // namespace affsym
