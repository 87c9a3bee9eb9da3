#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "affsym/jet.hpp"

namespace affsym {

// Uniform doubles in [0,1) built from the raw 64-bit stream, so samples are
// identical on every standard library implementation.
class SeededSampler {
 public:
  explicit SeededSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Eigen::VectorXd point_in(const ChartBox& box) {
    Eigen::VectorXd p(box.dim());
    for (int i = 0; i < box.dim(); ++i) {
      const auto [lo, hi] = box.bounds[static_cast<std::size_t>(i)];
      p[i] = uniform(lo, hi);
    }
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

// Random points strictly inside the box (5% margin) so finite-difference
// stencils around them stay inside the chart.
inline std::vector<Eigen::VectorXd> random_chart_points(const ChartBox& box, int count, std::uint64_t seed) {
  SeededSampler sampler(seed);
  const ChartBox inner = box.shrunk(0.05);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pts.push_back(sampler.point_in(inner));
  return pts;
}

// Tensor grid with `counts[i]` nodes per axis over the (5% shrunk) box; a
// single node sits at the axis midpoint. Last axis varies fastest.
inline std::vector<Eigen::VectorXd> grid_chart_points(const ChartBox& box, const std::vector<int>& counts) {
  const ChartBox inner = box.shrunk(0.05);
  const int dim = inner.dim();
  std::vector<Eigen::VectorXd> pts;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Eigen::VectorXd p(dim);
    for (int i = 0; i < dim; ++i) {
      const auto [lo, hi] = inner.bounds[static_cast<std::size_t>(i)];
      const int n = counts[static_cast<std::size_t>(i)];
      p[i] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[static_cast<std::size_t>(i)] / (n - 1);
    }
    pts.push_back(p);
    int i = dim - 1;
    for (; i >= 0; --i) {
      if (++idx[static_cast<std::size_t>(i)] < counts[static_cast<std::size_t>(i)]) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return pts;
}

}  // namespace affsym
