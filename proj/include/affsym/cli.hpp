#pragma once

// Command-line front end. `run` is the whole program; tools/affsym.cpp only
// forwards argv.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "affsym/blaschke.hpp"
#include "affsym/catalog.hpp"
#include "affsym/errors.hpp"
#include "affsym/family.hpp"
#include "affsym/flow.hpp"
#include "affsym/parallel.hpp"
#include "affsym/sampling.hpp"
#include "affsym/symmetry.hpp"

namespace affsym::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr double kResidualHardFail = 1e-4;

enum ExitCode { kOk = 0, kVerificationFailed = 1, kUsage = 2, kNumerical = 3 };

// Raised for malformed configs and flags; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlowConfig {
  StructureState init;
  double t_end = 1.0;
  double step = 1e-3;
  double lambda = 0.0;
};

struct RunConfig {
  std::string command;
  std::optional<std::string> surface;  // catalog name
  Params surface_params;
  std::optional<Json> family;          // raw family block
  std::vector<int> grid;
  int samples = 25;
  std::uint64_t seed = 42;
  double residual_tol = 1e-6;
  double classify_tol = 1e-6;
  std::optional<std::string> output_path;
  std::string format = "json";
  int drop_coordinate = 0;
  std::optional<FlowConfig> flow;
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline Params parse_params(const Json& j) {
  Params p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw ConfigError("params must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ConfigError("param '" + key + "' must be a number");
    p[key] = value.get<double>();
  }
  return p;
}

inline std::vector<double> number_list(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(what + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline CurveSpec parse_curve(const Json& j) {
  if (!j.is_object()) throw ConfigError("family.curve must be an object");
  const std::string kind = j.value("kind", std::string("polynomial"));
  std::pair<double, double> range{0.5, 1.5};
  if (j.contains("t_range")) {
    const auto r = number_list(j.at("t_range"), "curve.t_range");
    if (r.size() != 2 || !(r[0] < r[1])) throw ConfigError("curve.t_range must be [lo, hi] with lo < hi");
    range = {r[0], r[1]};
  }
  CurveSpec c;
  if (kind == "cosh_sinh") {
    c = cosh_sinh_curve(range);
  } else if (kind == "polynomial") {
    if (!j.contains("gamma1") || !j.contains("gamma2")) throw ConfigError("polynomial curve needs gamma1 and gamma2");
    c = polynomial_curve(number_list(j.at("gamma1"), "curve.gamma1"), number_list(j.at("gamma2"), "curve.gamma2"),
                         range);
  } else if (kind == "power") {
    c = power_curve(j.value("coefficient", 1.0), j.value("exponent", 2.0), range);
  } else if (kind == "exp") {
    c = exp_curve(range);
  } else {
    throw ConfigError("unknown curve kind '" + kind + "'");
  }
  if (j.contains("sigma")) c = reparametrize(c, number_list(j.at("sigma"), "curve.sigma"), range);
  return c;
}

inline std::vector<int> parse_grid_string(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw ConfigError("bad grid entry '" + item + "'");
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("bad grid entry '" + item + "'");
    }
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("schema_version")) throw ConfigError("config is missing schema_version");
  if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  static const std::vector<std::string> known{"schema_version", "command", "surface", "family", "grid", "samples",
                                              "seed", "tolerances", "output", "flow"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  c.command = j.value("command", std::string());
  if (j.contains("surface")) {
    const Json& s = j.at("surface");
    if (s.is_string()) {
      c.surface = s.get<std::string>();
    } else if (s.is_object() && s.contains("name") && s.at("name").is_string()) {
      c.surface = s.at("name").get<std::string>();
      if (s.contains("params")) c.surface_params = detail::parse_params(s.at("params"));
    } else {
      throw ConfigError("surface must be a name or {\"name\": ..., \"params\": {...}}");
    }
  }
  if (j.contains("family")) {
    if (!j.at("family").is_object()) throw ConfigError("family must be an object");
    c.family = j.at("family");
  }
  if (c.surface && c.family) throw ConfigError("config must name exactly one of surface and family");
  if (j.contains("grid")) {
    for (double v : detail::number_list(j.at("grid"), "grid")) {
      if (v != std::floor(v)) throw ConfigError("grid counts must be integers");
      c.grid.push_back(static_cast<int>(v));
    }
  }
  if (j.contains("samples")) {
    if (!j.at("samples").is_number_integer()) throw ConfigError("samples must be an integer");
    c.samples = j.at("samples").get<int>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    c.residual_tol = t.value("residual", c.residual_tol);
    c.classify_tol = t.value("classify", c.classify_tol);
    if (!(c.residual_tol > 0.0) || !(c.classify_tol > 0.0)) throw ConfigError("tolerances must be positive");
  }
  if (j.contains("output")) {
    const Json& o = j.at("output");
    if (!o.is_object()) throw ConfigError("output must be an object");
    if (o.contains("path")) c.output_path = o.at("path").get<std::string>();
    c.format = o.value("format", c.format);
    c.drop_coordinate = o.value("drop_coordinate", c.drop_coordinate);
  }
  if (j.contains("flow")) {
    const Json& f = j.at("flow");
    if (!f.is_object()) throw ConfigError("flow must be an object");
    FlowConfig fc;
    if (f.contains("init")) {
      const Json& i = f.at("init");
      fc.init.t = i.value("t", 0.0);
      fc.init.a = i.value("a", 0.0);
      fc.init.eta = i.value("eta", 0.0);
      fc.init.mu1 = i.value("mu1", 0.0);
      fc.init.mu2 = i.value("mu2", 0.0);
      fc.init.beta = i.value("beta", 1.0);
      fc.init.f = i.value("f", 0.0);
    }
    fc.t_end = f.value("t_end", fc.init.t + 1.0);
    fc.step = f.value("step", fc.step);
    fc.lambda = f.value("lambda", fc.lambda);
    if (!(fc.step > 0.0)) throw ConfigError("flow.step must be positive");
    if (!(fc.t_end > fc.init.t)) throw ConfigError("flow.t_end must exceed flow.init.t");
    if (!(fc.init.beta > 0.0)) throw ConfigError("flow.init.beta must be positive");
    c.flow = fc;
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Surface resolution

struct ResolvedSurface {
  ImmersionSpec spec;
  std::optional<BuiltFamily> family;
  std::string description;
};

inline ResolvedSurface resolve_surface(const RunConfig& c) {
  ResolvedSurface r;
  if (c.family) {
    const Json& f = *c.family;
    if (!f.contains("case") || !f.contains("sphere") || !f.contains("curve")) {
      throw ConfigError("family needs case, sphere and curve");
    }
    const std::string case_name = f.at("case").get<std::string>();
    FamilyCase fc;
    try {
      fc = family_case_from_string(case_name);
    } catch (const GeometryError&) {
      throw ConfigError("unknown family case '" + case_name + "'");
    }
    const Json& s = f.at("sphere");
    std::string sphere_name;
    Params params;
    if (s.is_string()) {
      sphere_name = s.get<std::string>();
    } else if (s.is_object() && s.contains("name")) {
      sphere_name = s.at("name").get<std::string>();
      if (s.contains("params")) params = detail::parse_params(s.at("params"));
    } else {
      throw ConfigError("family.sphere must be a name or {\"name\": ..., \"params\": {...}}");
    }
    const AffineSphereSpec sphere = sphere_catalog(sphere_name, params);
    const CurveSpec curve = detail::parse_curve(f.at("curve"));
    r.family = build_family(fc, curve, sphere);
    r.spec = r.family->spec;
    r.description = r.spec.name;
    return r;
  }
  if (!c.surface) throw ConfigError("no surface given (use --surface or a config with surface/family)");
  if (*c.surface == "sphere3") {
    if (!c.surface_params.empty()) throw ConfigError("sphere3 takes no parameters");
    r.spec = hypersurface_catalog("sphere3");
  } else {
    r.spec = sphere_catalog(*c.surface, c.surface_params).spec;
  }
  r.description = r.spec.name;
  return r;
}

inline std::vector<int> effective_grid(const RunConfig& c, int dim) {
  std::vector<int> g = c.grid;
  if (g.empty()) g.assign(static_cast<std::size_t>(dim), 3);
  if (g.size() == 1 && dim > 1) g.assign(static_cast<std::size_t>(dim), g[0]);
  if (static_cast<int>(g.size()) != dim) {
    throw ConfigError("grid needs " + std::to_string(dim) + " counts, got " + std::to_string(g.size()));
  }
  for (int n : g) {
    if (n < 1) throw ConfigError("grid counts must be >= 1");
  }
  return g;
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace detail {

inline Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

inline Json to_json(const Tensor12& K) {
  Json a = Json::array();
  for (const auto& m : K) a.push_back(to_json(m));
  return a;
}

inline Json to_json(const SymmetryReport& r) {
  Json j;
  j["group"] = r.label();
  j["mu1"] = r.mu1;
  j["mu2"] = r.mu2;
  j["lambda"] = r.lambda;
  j["a"] = r.a;
  j["J"] = r.J;
  j["eta"] = r.eta ? Json(*r.eta) : Json(nullptr);
  j["nu"] = r.nu ? Json(*r.nu) : Json(nullptr);
  if (const auto cls = r.nu_class()) j["nu_case"] = to_string(*cls);
  j["canonical_residual"] = r.canonical_residual;
  if (r.group != SymmetryGroup::NotApplicable) {
    j["frame"] = {{"e1", to_json(Eigen::VectorXd(r.frame.e1))},
                  {"e2", to_json(Eigen::VectorXd(r.frame.e2))},
                  {"e3", to_json(Eigen::VectorXd(r.frame.e3))},
                  {"theta", r.frame.theta},
                  {"nu1", r.frame.nu1},
                  {"nu2", r.frame.nu2}};
  }
  return j;
}

inline Json residuals_json(const ResidualReport& r) {
  Json j;
  j["gauss_nabla"] = r.gauss_nabla;
  j["codazzi_S"] = r.codazzi_S;
  j["codazzi_K"] = r.codazzi_K;
  j["gauss_hat"] = r.gauss_hat;
  j["apolarity"] = r.apolarity;
  j["definiteness"] = r.definiteness;
  j["evaluated"] = r.evaluated;
  Json fails = Json::array();
  for (const auto& f : r.failures) {
    fails.push_back({{"point", to_json(f.point)}, {"error", std::string(to_string(f.code))}, {"message", f.message}});
  }
  j["failures"] = fails;
  return j;
}

inline Json family_json(const FamilySpec& f) {
  Json j;
  j["case"] = to_string(f.family_case);
  j["sphere"] = {{"name", f.sphere.name}, {"kind", to_string(f.sphere.kind)}, {"quadric", f.sphere.quadric}};
  j["curve"] = {{"kind", to_string(f.curve.kind)}, {"t_range", {f.curve.t_range.first, f.curve.t_range.second}}};
  j["admissible"] = f.admissible;
  j["definite"] = f.definite;
  j["wronskian_sign"] = f.wronskian_sign;
  j["failing_t"] = f.failing_t ? Json(*f.failing_t) : Json(nullptr);
  return j;
}

inline std::string output_file(const RunConfig& c, const std::string& ext) {
  std::filesystem::path p(*c.output_path);
  if (p.extension() == "." + ext) return p.string();
  return p.string() + "." + ext;
}

inline void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

// Writes `j` to the configured path, or to `out` when no path is set.
inline void emit_json(const RunConfig& c, const Json& j, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (c.output_path) {
    write_text(output_file(c, "json"), text);
  } else {
    out << text;
  }
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << (v == 0.0 ? 0.0 : v);
  return s.str();
}

inline std::string percent(int count, int total) {
  std::ostringstream s;
  const double p = total > 0 ? 100.0 * count / total : 0.0;
  if (std::abs(p - std::round(p)) < 1e-9) {
    s << static_cast<long>(std::round(p));
  } else {
    s << std::fixed << std::setprecision(1) << p;
  }
  return s.str() + "%";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline int cmd_invariants(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ResolvedSurface s = resolve_surface(c);
  const auto points = grid_chart_points(s.spec.chart_box, effective_grid(c, s.spec.domain_dim));
  struct Item {
    bool ok = false;
    BlaschkeData d;
    ErrorCode code{};
    std::string message;
  };
  const auto items = parallel_map<Item>(points.size(), [&](std::size_t i) {
    Item it;
    try {
      it.d = blaschke_data(s.spec, points[i]);
      it.ok = true;
    } catch (const GeometryError& e) {
      it.code = e.code();
      it.message = e.what();
    }
    return it;
  });

  int numerical = 0;
  std::optional<Eigen::VectorXd> first_bad;
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "point,J,apolarity,volume_defect,h,xi,S\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Item& it = items[i];
    Json row;
    row["point"] = detail::to_json(points[i]);
    if (!it.ok) {
      row["error"] = std::string(to_string(it.code));
      row["message"] = it.message;
      if (is_numerical(it.code)) {
        ++numerical;
        if (!first_bad) first_bad = points[i];
      }
      rows.push_back(row);
      continue;
    }
    row["h"] = detail::to_json(it.d.h);
    row["xi"] = detail::to_json(it.d.xi);
    row["S"] = detail::to_json(it.d.S);
    row["K"] = detail::to_json(it.d.K);
    row["J"] = it.d.J;
    row["dxi"] = detail::to_json(it.d.dxi);
    row["apolarity"] = it.d.apolarity;
    row["volume_defect"] = it.d.volume_defect;
    rows.push_back(row);

    auto join = [](const Eigen::MatrixXd& m) {
      std::string s;
      for (Eigen::Index k = 0; k < m.size(); ++k) s += (k ? " " : "") + detail::fmt(m.data()[k]);
      return s;
    };
    csv << join(points[i].transpose()) << ',' << detail::fmt(it.d.J) << ',' << detail::fmt(it.d.apolarity) << ','
        << detail::fmt(it.d.volume_defect) << ',' << join(it.d.h) << ',' << join(it.d.xi.transpose()) << ','
        << join(it.d.S) << '\n';
  }

  if (c.format == "csv") {
    if (c.output_path) {
      detail::write_text(detail::output_file(c, "csv"), csv.str());
    } else {
      out << csv.str();
    }
  } else {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "invariants";
    j["surface"] = s.description;
    j["grid"] = effective_grid(c, s.spec.domain_dim);
    j["points"] = rows;
    detail::emit_json(c, j, out);
  }
  if (numerical > 0) {
    err << "numerical failure at " << numerical << " of " << points.size() << " points; first at ("
        << detail::fmt((*first_bad)[0]);
    for (Eigen::Index k = 1; k < first_bad->size(); ++k) err << ", " << detail::fmt((*first_bad)[k]);
    err << ")\n";
    return kNumerical;
  }
  return kOk;
}

inline int cmd_classify(const RunConfig& c, std::ostream& out, std::ostream&) {
  const ResolvedSurface s = resolve_surface(c);
  const auto points = grid_chart_points(s.spec.chart_box, effective_grid(c, s.spec.domain_dim));
  ClassifyOptions opts;
  opts.rel_tol = c.classify_tol;
  const auto reports =
      parallel_map<SymmetryReport>(points.size(), [&](std::size_t i) { return classify_point(s.spec, points[i], opts); });

  std::map<std::string, int> histogram;
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "point,group,mu1,mu2,lambda,a,eta,nu\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++histogram[reports[i].label()];
    Json row = detail::to_json(reports[i]);
    row["point"] = detail::to_json(points[i]);
    rows.push_back(row);
    std::string p;
    for (Eigen::Index k = 0; k < points[i].size(); ++k) p += (k ? " " : "") + detail::fmt(points[i][k]);
    const auto& r = reports[i];
    csv << p << ',' << r.label() << ',' << detail::fmt(r.mu1) << ',' << detail::fmt(r.mu2) << ','
        << detail::fmt(r.lambda) << ',' << detail::fmt(r.a) << ',' << (r.eta ? detail::fmt(*r.eta) : "") << ','
        << (r.nu ? detail::fmt(*r.nu) : "") << '\n';
  }
  Json summary = Json::object();
  for (const auto& [label, count] : histogram) summary[label] = detail::percent(count, static_cast<int>(points.size()));

  if (c.output_path) {
    if (c.format == "csv") {
      detail::write_text(detail::output_file(c, "csv"), csv.str());
    } else {
      Json j;
      j["schema_version"] = kSchemaVersion;
      j["command"] = "classify";
      j["surface"] = s.description;
      j["grid"] = effective_grid(c, s.spec.domain_dim);
      j["summary"] = summary;
      j["points"] = rows;
      detail::emit_json(c, j, out);
    }
  }
  for (const auto& [label, count] : histogram) {
    out << label << ": " << detail::percent(count, static_cast<int>(points.size())) << "\n";
  }
  return kOk;
}

inline std::string obj_mesh(const ImmersionSpec& spec, const std::vector<int>& grid, int drop) {
  const ChartBox inner = spec.chart_box.shrunk(0.05);
  auto node = [&](int axis, int k) {
    const auto [lo, hi] = inner.bounds[static_cast<std::size_t>(axis)];
    const int n = grid[static_cast<std::size_t>(axis)];
    return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (n - 1);
  };
  std::ostringstream obj;
  obj << "# t-slices of F(t,u,v); coordinate " << drop << " dropped\n";
  long base = 1;
  for (int it = 0; it < grid[0]; ++it) {
    obj << "o slice_" << it << "\n";
    for (int iu = 0; iu < grid[1]; ++iu) {
      for (int iv = 0; iv < grid[2]; ++iv) {
        const Eigen::VectorXd y = spec.point_eval(Eigen::Vector3d(node(0, it), node(1, iu), node(2, iv)));
        obj << "v";
        for (int k = 0; k < 4; ++k) {
          if (k != drop) obj << ' ' << detail::fmt(y[k]);
        }
        obj << "\n";
      }
    }
    for (int iu = 0; iu + 1 < grid[1]; ++iu) {
      for (int iv = 0; iv + 1 < grid[2]; ++iv) {
        const long a = base + iu * grid[2] + iv;
        obj << "f " << a << ' ' << a + grid[2] << ' ' << a + grid[2] + 1 << ' ' << a + 1 << "\n";
      }
    }
    base += static_cast<long>(grid[1]) * grid[2];
  }
  return obj.str();
}

inline int cmd_construct(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (!c.family) throw ConfigError("construct needs a family block");
  if (c.drop_coordinate < 0 || c.drop_coordinate > 3) throw ConfigError("output.drop_coordinate must be in 0..3");
  if (c.format != "json" && c.format != "obj") throw ConfigError("construct writes json (+obj); format '" + c.format + "' unsupported");

  ResolvedSurface s;
  std::optional<FamilySpec> rejected;
  try {
    s = resolve_surface(c);
  } catch (const GeometryError& e) {
    if (e.code() != ErrorCode::InadmissibleCurve) throw;
    const Json& f = *c.family;
    const Json& sph = f.at("sphere");
    const AffineSphereSpec sphere = sph.is_string() ? sphere_catalog(sph.get<std::string>())
                                                    : sphere_catalog(sph.at("name").get<std::string>(),
                                                                     detail::parse_params(sph.value("params", Json())));
    rejected = assess_family(family_case_from_string(f.at("case").get<std::string>()), detail::parse_curve(f.at("curve")),
                             sphere);
  }

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "construct";
  if (rejected) {
    j["family"] = detail::family_json(*rejected);
    detail::emit_json(c, j, out);
    err << "inadmissible curve";
    if (rejected->failing_t) err << " at t = " << detail::fmt(*rejected->failing_t);
    err << "\n";
    return kVerificationFailed;
  }
  const std::vector<int> grid = effective_grid(c, 3);
  j["family"] = detail::family_json(s.family->family);
  j["surface"] = s.description;
  j["grid"] = grid;
  j["drop_coordinate"] = c.drop_coordinate;
  Json pts = Json::array();
  for (const auto& p : grid_chart_points(s.spec.chart_box, grid)) {
    pts.push_back({{"chart", detail::to_json(p)}, {"F", detail::to_json(s.spec.point_eval(p))}});
  }
  j["points"] = pts;
  detail::emit_json(c, j, out);
  if (c.output_path) detail::write_text(detail::output_file(c, "obj"), obj_mesh(s.spec, grid, c.drop_coordinate));
  return kOk;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ResolvedSurface s = resolve_surface(c);
  if (c.samples < 1) throw ConfigError("samples must be >= 1");
  const auto points = random_chart_points(s.spec.chart_box, c.samples, c.seed);
  const ResidualReport res = structure_residuals(s.spec, points);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "verify";
  j["surface"] = s.description;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["tolerance"] = c.residual_tol;
  j["residuals"] = detail::residuals_json(res);

  // below residual_tol: pass; up to kResidualHardFail: pass with a warning; above: fail
  const double worst = res.max_residual();
  const bool warn = worst >= c.residual_tol && worst <= kResidualHardFail;
  bool pass = res.failures.empty() && (worst < c.residual_tol || warn);
  bool numerical = false;
  for (const auto& f : res.failures) numerical = numerical || is_numerical(f.code);

  if (s.family) {
    j["family"] = detail::family_json(s.family->family);
    if (s.family->family.definite) {
      ClassifyOptions opts;
      opts.rel_tol = c.classify_tol;
      const RoundtripReport rt = roundtrip_verify(*s.family, points, opts);
      Json mism = Json::array();
      for (const auto& m : rt.mismatches) {
        mism.push_back({{"point", detail::to_json(m.point)}, {"expected", m.expected}, {"got", m.got}});
      }
      j["roundtrip"] = {{"samples", rt.samples}, {"SO2", rt.so2}, {"Z3", rt.z3},
                        {"NotApplicable", rt.not_applicable}, {"case_matches", rt.case_matches},
                        {"mismatches", mism}};
      pass = pass && rt.ok();
    } else {
      pass = false;
    }
  }
  j["pass"] = pass;
  j["warning"] = warn;
  detail::emit_json(c, j, out);
  if (warn && res.failures.empty()) {
    err << "warning: max residual " << detail::fmt(worst) << " above tolerance " << detail::fmt(c.residual_tol) << "\n";
  }
  if (numerical) {
    const auto& f = res.failures.front();
    err << "numerical failure (" << to_string(f.code) << ") at (" << detail::fmt(f.point[0]);
    for (Eigen::Index k = 1; k < f.point.size(); ++k) err << ", " << detail::fmt(f.point[k]);
    err << ")\n";
    return kNumerical;
  }
  if (!pass) {
    err << "verification failed: max residual " << detail::fmt(res.max_residual()) << "\n";
    return kVerificationFailed;
  }
  return kOk;
}

inline int cmd_flow(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (!c.flow) throw ConfigError("flow needs a flow block");
  if (c.format != "csv" && c.format != "json") throw ConfigError("flow writes csv; format '" + c.format + "' unsupported");
  const FlowConfig& f = *c.flow;
  const double lambda = f.lambda;
  const Trajectory traj = flow_integrate(f.init, f.t_end, f.step, [lambda](double) { return lambda; });
  const FirstIntegralReport fi = first_integral_check(traj);

  std::ostringstream csv;
  write_trajectory_csv(traj, csv);
  if (c.output_path) {
    detail::write_text(detail::output_file(c, "csv"), csv.str());
    if (c.format == "json") {
      Json j;
      j["schema_version"] = kSchemaVersion;
      j["command"] = "flow";
      j["step"] = traj.step;
      j["samples"] = traj.samples.size();
      j["drift_nu"] = fi.drift_nu;
      j["drift_curv"] = fi.drift_curv;
      j["drift_nu_relative"] = fi.nu_relative;
      j["drift_curv_relative"] = fi.curv_relative;
      detail::emit_json(c, j, out);
    }
  } else {
    out << csv.str();
  }
  out << "drift_nu: " << detail::fmt(fi.drift_nu) << (fi.nu_relative ? " (relative)" : " (absolute)") << "\n";
  out << "drift_curv: " << detail::fmt(fi.drift_curv) << (fi.curv_relative ? " (relative)" : " (absolute)") << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Equiaffine invariants, symmetry classification and structure-equation checks"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, surface, output, format, grid;
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
  };
  Flags flags;
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"invariants", "Blaschke data on a chart grid"},
           {"classify", "pointwise symmetry labels on a chart grid"},
           {"construct", "build a family hypersurface and export it"},
           {"verify", "structure-equation residuals and round-trip classification"},
           {"flow", "integrate the structure ODEs and check first integrals"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--surface", flags.surface, "catalog surface name");
    sub->add_option("--output", flags.output, "output path (stem)");
    sub->add_option("--format", flags.format, "json, csv or obj");
    sub->add_option("--seed", flags.seed, "random seed for sample points");
    sub->add_option("--samples", flags.samples, "number of random sample points");
    sub->add_option("--grid", flags.grid, "per-axis grid counts, e.g. 5,5,5");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kUsage;
  }

  std::string command;
  for (CLI::App* s : subs) {
    if (s->parsed()) command = s->get_name();
  }

  try {
    RunConfig c = flags.config.empty() ? RunConfig{} : load_config(flags.config);
    if (!c.command.empty() && c.command != command) {
      err << "note: config command '" << c.command << "' overridden by '" << command << "'\n";
    }
    c.command = command;
    if (!flags.surface.empty()) {
      c.surface = flags.surface;
      c.surface_params.clear();
      c.family.reset();
    }
    if (!flags.output.empty()) c.output_path = flags.output;
    if (!flags.format.empty()) c.format = flags.format;
    if (flags.seed) c.seed = *flags.seed;
    if (flags.samples) c.samples = *flags.samples;
    if (!flags.grid.empty()) c.grid = detail::parse_grid_string(flags.grid);
    if (c.format != "json" && c.format != "csv" && c.format != "obj") {
      throw ConfigError("unknown format '" + c.format + "'");
    }

    if (command == "invariants") return cmd_invariants(c, out, err);
    if (command == "classify") return cmd_classify(c, out, err);
    if (command == "construct") return cmd_construct(c, out, err);
    if (command == "verify") return cmd_verify(c, out, err);
    return cmd_flow(c, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Json::exception& e) {
    err << "error: malformed config: " << e.what() << "\n";
    return kUsage;
  } catch (const GeometryError& e) {
    err << "error: " << e.what();
    if (e.where()) err << " (at t = " << detail::fmt(*e.where()) << ")";
    err << "\n";
    return is_numerical(e.code()) ? kNumerical : kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace affsym::cli
