#pragma once

// Scalar structure equations along the e1 direction:
//   a'   = (mu1 - eta)(a - lambda)
//   eta' = -eta^2 - 3 mu1^2 - (a + lambda)/2
//   mu1' = -4 mu1 eta + (a - lambda)/2
//   mu2' = -mu2 eta
//   beta' = beta (eta + mu1)
//   f'   = eta
// First integrals: e^{2f} nu with nu = a + eta^2 - mu1^2, and
// e^{2f} (a - mu1^2 + 2 mu2^2 + eta^2).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "affsym/errors.hpp"
#include "affsym/jet.hpp"
#include "affsym/symmetry.hpp"

namespace affsym {

using LambdaFn = std::function<double(double)>;

struct StructureState {
  double t = 0.0;
  double a = 0.0;
  double eta = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double beta = 1.0;
  double f = 0.0;

  double nu() const { return a + eta * eta - mu1 * mu1; }
  double e2f_nu() const { return std::exp(2 * f) * nu(); }
  double curv_n2() const { return std::exp(2 * f) * (a - mu1 * mu1 + 2 * mu2 * mu2 + eta * eta); }
};

struct Trajectory {
  std::vector<StructureState> samples;
  std::string method = "rk4";
  double step = 0.0;
};

namespace detail {

using FlowVec = std::array<double, 6>;  // a, eta, mu1, mu2, beta, f

inline FlowVec pack(const StructureState& s) { return {s.a, s.eta, s.mu1, s.mu2, s.beta, s.f}; }

inline StructureState unpack(double t, const FlowVec& v) { return {t, v[0], v[1], v[2], v[3], v[4], v[5]}; }

inline FlowVec flow_rhs(const FlowVec& y, double lambda) {
  const double a = y[0], eta = y[1], mu1 = y[2], mu2 = y[3], beta = y[4];
  return {(mu1 - eta) * (a - lambda),
          -eta * eta - 3 * mu1 * mu1 - 0.5 * (a + lambda),
          -4 * mu1 * eta + 0.5 * (a - lambda),
          -mu2 * eta,
          beta * (eta + mu1),
          eta};
}

inline FlowVec axpy(const FlowVec& y, double h, const FlowVec& k) {
  FlowVec out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + h * k[i];
  return out;
}

// One classical RK4 step given lambda at t, t + h/2, t + h.
inline FlowVec rk4_step(const FlowVec& y, double h, double l0, double lmid, double l1) {
  const FlowVec k1 = flow_rhs(y, l0);
  const FlowVec k2 = flow_rhs(axpy(y, 0.5 * h, k1), lmid);
  const FlowVec k3 = flow_rhs(axpy(y, 0.5 * h, k2), lmid);
  const FlowVec k4 = flow_rhs(axpy(y, h, k3), l1);
  FlowVec out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

inline void check_blowup(const FlowVec& y, double t) {
  for (double v : y) {
    if (!std::isfinite(v) || std::abs(v) > 1e12) {
      throw GeometryError(ErrorCode::BlowUp, "structure flow left the finite range", t);
    }
  }
}

}  // namespace detail

// Fixed-step RK4 from init.t to t_end. The step is shrunk so that an integer
// number of steps lands exactly on t_end.
inline Trajectory flow_integrate(const StructureState& init, double t_end, double step,
                                 const LambdaFn& lambda = [](double) { return 0.0; }) {
  if (!(step > 0.0)) throw GeometryError(ErrorCode::ParamsOutOfRange, "flow step must be positive");
  if (!(t_end > init.t)) throw GeometryError(ErrorCode::ParamsOutOfRange, "flow t_span must be increasing");
  const long n = std::max(1L, static_cast<long>(std::ceil((t_end - init.t) / step - 1e-9)));
  const double h = (t_end - init.t) / static_cast<double>(n);

  Trajectory traj;
  traj.step = h;
  traj.samples.reserve(static_cast<std::size_t>(n + 1));
  traj.samples.push_back(init);
  detail::FlowVec y = detail::pack(init);
  detail::check_blowup(y, init.t);
  for (long k = 0; k < n; ++k) {
    const double t = init.t + static_cast<double>(k) * h;
    y = detail::rk4_step(y, h, lambda(t), lambda(t + 0.5 * h), lambda(t + h));
    detail::check_blowup(y, t + h);
    traj.samples.push_back(detail::unpack(init.t + static_cast<double>(k + 1) * h, y));
  }
  return traj;
}

struct FirstIntegralReport {
  double drift_nu = 0.0;
  double drift_curv = 0.0;
  bool nu_relative = false;
  bool curv_relative = false;
  bool nu_sign_persistent = true;
  bool eta_minus_mu1_sign_persistent = true;
};

// Drifts are relative to the initial value when it exceeds `zero_floor` in
// magnitude and absolute otherwise.
inline FirstIntegralReport first_integral_check(const Trajectory& traj, double zero_floor = 1e-12,
                                                double sign_tol = 1e-8) {
  FirstIntegralReport r;
  if (traj.samples.empty()) return r;
  const StructureState& s0 = traj.samples.front();
  const double nu0 = s0.e2f_nu();
  const double c0 = s0.curv_n2();
  r.nu_relative = std::abs(nu0) > zero_floor;
  r.curv_relative = std::abs(c0) > zero_floor;
  const double d0 = s0.eta - s0.mu1;
  for (const auto& s : traj.samples) {
    const double nu = s.e2f_nu();
    const double c = s.curv_n2();
    r.drift_nu = std::max(r.drift_nu, std::abs(nu - nu0));
    r.drift_curv = std::max(r.drift_curv, std::abs(c - c0));
    if (r.nu_relative && nu * nu0 < 0.0 && std::abs(nu) > sign_tol) r.nu_sign_persistent = false;
    const double d = s.eta - s.mu1;
    if (std::abs(d0) > sign_tol && d * d0 < 0.0 && std::abs(d) > sign_tol) r.eta_minus_mu1_sign_persistent = false;
  }
  if (r.nu_relative) r.drift_nu /= std::abs(nu0);
  if (r.curv_relative) r.drift_curv /= std::abs(c0);
  return r;
}

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,a,eta,mu1,mu2,beta,f,e2f_nu,curvN2\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& s : traj.samples) {
    line.str("");
    line << s.t << ',' << s.a << ',' << s.eta << ',' << s.mu1 << ',' << s.mu2 << ',' << s.beta << ',' << s.f << ','
         << s.e2f_nu() << ',' << s.curv_n2() << '\n';
    out << line.str();
  }
}

// ---------------------------------------------------------------------------
// Consistency between a classified hypersurface and the flow.

struct ChartLine {
  std::vector<Eigen::VectorXd> points;   // spacing step/2 in the e1 arclength
  std::vector<SymmetryReport> reports;   // classification at each point
  double step = 0.0;
};

namespace detail {

inline Eigen::Vector3d e1_at(const ImmersionSpec& spec, const Eigen::VectorXd& x, const FrameOptions& opts) {
  return frame_near(spec, x, opts).e1;
}

}  // namespace detail

// Integral curve of the unit e1 field from `start`, traced with RK4 at half
// the flow step until chart coordinate `axis` leaves [lo, hi]. e1 is the
// canonical (mu1 > 0) direction, so the line runs with increasing arclength
// along e1 whichever way that moves the chart coordinate.
inline ChartLine trace_chart_line(const ImmersionSpec& spec, const Eigen::VectorXd& start, int axis, double lo,
                                  double hi, double step, const ClassifyOptions& opts = {}) {
  ChartLine line;
  line.step = step;
  const double h = 0.5 * step;
  Eigen::VectorXd x = start;
  auto inside = [&](const Eigen::VectorXd& p) { return p[axis] >= lo - 1e-12 && p[axis] <= hi + 1e-12; };
  const std::size_t guard = 1000000;
  while (inside(x) && line.points.size() < guard) {
    line.points.push_back(x);
    const Eigen::Vector3d k1 = detail::e1_at(spec, x, opts.patch.frame);
    const Eigen::Vector3d k2 = detail::e1_at(spec, x + 0.5 * h * k1, opts.patch.frame);
    const Eigen::Vector3d k3 = detail::e1_at(spec, x + 0.5 * h * k2, opts.patch.frame);
    const Eigen::Vector3d k4 = detail::e1_at(spec, x + h * k3, opts.patch.frame);
    x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  // keep an odd number of points so the flow sees whole steps
  if (line.points.size() % 2 == 0 && !line.points.empty()) line.points.pop_back();
  line.reports = parallel_map<SymmetryReport>(line.points.size(),
                                              [&](std::size_t i) { return classify_point(spec, line.points[i], opts); });
  for (const auto& r : line.reports) {
    if (r.group == SymmetryGroup::NotApplicable) {
      throw GeometryError(ErrorCode::AmbiguousAxis, "chart line leaves the classified region: " + r.label());
    }
    if (!r.eta) throw GeometryError(ErrorCode::FrameNotDifferentiable, "chart line point without connection scalars");
  }
  return line;
}

struct MatchReport {
  double max_deviation = 0.0;
  std::array<double, 4> deviation{};  // a, eta, mu1, mu2
  Trajectory flow;
  std::vector<StructureState> surface;
};

// Runs the flow from the surface scalars at the first point of the line with
// lambda read off the surface, and compares a, eta, mu1, mu2 node by node.
inline MatchReport match_surface(const ChartLine& line) {
  if (line.points.size() < 3) throw GeometryError(ErrorCode::ParamsOutOfRange, "chart line too short");
  const std::size_t nodes = (line.points.size() - 1) / 2;
  std::vector<double> lambdas;
  for (const auto& r : line.reports) lambdas.push_back(r.lambda);

  MatchReport out;
  for (std::size_t k = 0; k < line.points.size(); k += 2) {
    const auto& r = line.reports[k];
    out.surface.push_back({0.5 * line.step * static_cast<double>(k), r.a, *r.eta, r.mu1, r.mu2, 1.0, 0.0});
  }
  detail::FlowVec y = detail::pack(out.surface.front());
  out.flow.step = line.step;
  out.flow.samples.push_back(out.surface.front());
  for (std::size_t k = 0; k < nodes; ++k) {
    y = detail::rk4_step(y, line.step, lambdas[2 * k], lambdas[2 * k + 1], lambdas[2 * k + 2]);
    detail::check_blowup(y, line.step * static_cast<double>(k + 1));
    out.flow.samples.push_back(detail::unpack(line.step * static_cast<double>(k + 1), y));
  }
  for (std::size_t k = 0; k < out.surface.size(); ++k) {
    const auto& s = out.surface[k];
    const auto& f = out.flow.samples[k];
    const std::array<double, 4> d{std::abs(s.a - f.a), std::abs(s.eta - f.eta), std::abs(s.mu1 - f.mu1),
                                  std::abs(s.mu2 - f.mu2)};
    for (std::size_t c = 0; c < 4; ++c) out.deviation[c] = std::max(out.deviation[c], d[c]);
  }
  for (double d : out.deviation) out.max_deviation = std::max(out.max_deviation, d);
  return out;
}

}  // namespace affsym
