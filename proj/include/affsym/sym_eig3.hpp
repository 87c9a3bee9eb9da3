#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace affsym {

// Symmetric 3x3 matrix stored by its six independent entries
// (xx, xy, xz, yy, yz, zz).
class SymMatrix3 {
 public:
  SymMatrix3() = default;
  explicit SymMatrix3(const std::array<double, 6>& entries) : e_(entries) {}

  static SymMatrix3 from_dense(const Eigen::Matrix3d& m) {
    return SymMatrix3({m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)), m(1, 1),
                       0.5 * (m(1, 2) + m(2, 1)), m(2, 2)});
  }

  static SymMatrix3 identity() { return SymMatrix3({1, 0, 0, 1, 0, 1}); }

  double operator()(int i, int j) const {
    static constexpr int kSlot[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return e_[static_cast<std::size_t>(kSlot[i][j])];
  }

  Eigen::Matrix3d dense() const {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m(i, j) = (*this)(i, j);
    }
    return m;
  }

  const std::array<double, 6>& entries() const { return e_; }

 private:
  std::array<double, 6> e_{};
};

struct SymEigen3 {
  Eigen::Vector3d values;   // descending
  Eigen::Matrix3d vectors;  // column k belongs to values[k]
};

namespace detail {

inline void fix_sign(Eigen::Ref<Eigen::Vector3d> v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-10) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace detail

// Eigen-decomposition with a deterministic frame. Eigenvalues closer than
// 1e-12 * |m| are treated as one cluster whose basis is obtained by
// Gram-Schmidt of the projected coordinate axes, in coordinate order.
inline SymEigen3 sym_eig3(const SymMatrix3& m) {
  const Eigen::Matrix3d dense = m.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(dense);
  SymEigen3 out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = solver.eigenvalues()[2 - k];
    out.vectors.col(k) = solver.eigenvectors().col(2 - k);
  }

  const double tol = 1e-12 * std::max(dense.norm(), 1e-300);
  int start = 0;
  while (start < 3) {
    int end = start + 1;
    while (end < 3 && std::abs(out.values[end - 1] - out.values[end]) <= tol) ++end;
    if (end - start > 1) {
      const int size = end - start;
      const Eigen::MatrixXd basis = out.vectors.middleCols(start, size);
      int chosen = 0;
      for (int axis = 0; axis < 3 && chosen < size; ++axis) {
        Eigen::Vector3d v = basis * (basis.transpose() * Eigen::Vector3d::Unit(axis));
        for (int j = 0; j < chosen; ++j) {
          const Eigen::Vector3d prev = out.vectors.col(start + j);
          v -= prev.dot(v) * prev;
        }
        if (v.norm() < 0.1) continue;
        out.vectors.col(start + chosen) = v.normalized();
        ++chosen;
      }
      const double mean = out.values.segment(start, size).mean();
      out.values.segment(start, size).setConstant(mean);
    }
    start = end;
  }
  for (int k = 0; k < 3; ++k) detail::fix_sign(out.vectors.col(k));
  return out;
}

}  // namespace affsym
