#pragma once

// Dense matrices of at most 4x4 over a generic scalar. Used with T = Series so
// that determinants and inverses carry their Taylor expansions along.

#include <cassert>
#include <cstddef>
#include <vector>

namespace affsym {

template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  // Builds a matrix whose columns are the given vectors.
  static Mat from_columns(const std::vector<std::vector<T>>& columns) {
    assert(!columns.empty());
    Mat m(static_cast<int>(columns.front().size()), static_cast<int>(columns.size()));
    for (int c = 0; c < m.cols_; ++c) {
      for (int r = 0; r < m.rows_; ++r) m(r, c) = columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
    }
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Mat<T> minor_of(const Mat<T>& m, int skip_row, int skip_col) {
  Mat<T> out(m.rows() - 1, m.cols() - 1);
  for (int r = 0, rr = 0; r < m.rows(); ++r) {
    if (r == skip_row) continue;
    for (int c = 0, cc = 0; c < m.cols(); ++c) {
      if (c == skip_col) continue;
      out(rr, cc++) = m(r, c);
    }
    ++rr;
  }
  return out;
}

// Laplace expansion along the first row; fine for n <= 4.
template <class T>
T determinant(const Mat<T>& m) {
  assert(m.rows() == m.cols() && m.rows() >= 1);
  const int n = m.rows();
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  T acc = m(0, 0) * determinant(minor_of(m, 0, 0));
  for (int c = 1; c < n; ++c) {
    T term = m(0, c) * determinant(minor_of(m, 0, c));
    if (c % 2 == 0) {
      acc += term;
    } else {
      acc -= term;
    }
  }
  return acc;
}

template <class T>
Mat<T> adjugate(const Mat<T>& m) {
  const int n = m.rows();
  Mat<T> adj(n, n);
  if (n == 1) {
    adj(0, 0) = T(1.0);
    return adj;
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      T cof = determinant(minor_of(m, r, c));
      adj(c, r) = ((r + c) % 2 == 0) ? cof : -cof;
    }
  }
  return adj;
}

template <class T>
Mat<T> inverse(const Mat<T>& m, const T& det) {
  Mat<T> inv = adjugate(m);
  const T scale = T(1.0) / det;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) inv(r, c) = inv(r, c) * scale;
  }
  return inv;
}

}  // namespace affsym
