#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "richards/cases.hpp"
#include "richards/constitutive.hpp"
#include "richards/driver.hpp"
#include "richards/field.hpp"
#include "richards/mesh.hpp"

namespace richards {

/// Shortest decimal that round-trips a double (up to 17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

/// Per-iteration log, one row per linearized solve. Optional indicator cells
/// are left empty where the executed scheme does not define them.
inline void write_iterations_csv(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "step,iter,scheme,eta_lin,eta_LN,eta_NL,eta_LL,C_N,eff_index,wall_ms\n";
  for (const IterationRecord& r : report.records) {
    out << r.step << ',' << r.iter << ',' << r.scheme << ',' << format_double(r.eta_lin) << ','
        << format_optional(r.eta_ln) << ',' << format_optional(r.eta_nl) << ','
        << format_optional(r.eta_ll) << ',' << format_optional(r.c_n) << ','
        << format_optional(r.eff_index) << ',' << format_double(r.wall_ms) << '\n';
  }
}

inline std::vector<IterationRecord> read_iterations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) return {};
  if (line.rfind("step,iter,scheme", 0) != 0)
    throw std::runtime_error(path + ": not an iteration log");
  std::vector<IterationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(10);
    IterationRecord r;
    r.step = std::stoi(cells[0]);
    r.iter = std::stoi(cells[1]);
    r.scheme = cells[2].empty() ? '?' : cells[2][0];
    r.eta_lin = std::stod(cells[3]);
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    r.eta_ln = opt(cells[4]);
    r.eta_nl = opt(cells[5]);
    r.eta_ll = opt(cells[6]);
    r.c_n = opt(cells[7]);
    r.eff_index = opt(cells[8]);
    r.wall_ms = cells[9].empty() ? 0.0 : std::stod(cells[9]);
    out.push_back(r);
  }
  return out;
}

/// Legacy-ASCII unstructured-grid export of the final pressure head and the
/// water content it implies. Vertical coordinate goes to the file's second
/// axis; values carry 17 significant digits so round-trips are exact.
template <constitutive_model M>
void write_vtk(const std::string& path, const Mesh& mesh, const DiscreteField& psi,
               const M& model, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec2 p = mesh.vertex(i);
    out << format_double(p.x) << ' ' << format_double(p.z) << " 0\n";
  }
  out << "CELLS " << mesh.element_count() << ' ' << 4 * mesh.element_count() << '\n';
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.element(e);
    out << "3 " << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.element_count() << '\n';
  for (int e = 0; e < mesh.element_count(); ++e) out << "5\n";
  out << "POINT_DATA " << mesh.vertex_count() << '\n';
  out << "SCALARS pressure_head double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < mesh.vertex_count(); ++i) out << format_double(psi.values[i]) << '\n';
  out << "SCALARS saturation double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < mesh.vertex_count(); ++i)
    out << format_double(model.theta(psi.values[i])) << '\n';
}

/// One sweep result row.
struct SweepRow {
  std::string axis;  // "mesh" or "tau"
  double value = 0.0;
  std::string strategy;
  std::string status;  // "converged" or "diverged"
  int iterations = 0, l_iters = 0, n_iters = 0;
  int violations = 0;  // realized error exceeded a previous iteration's bound
  double wall_ms = 0.0;
};

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "axis,value,strategy,status,iterations,l_iters,n_iters,violations,wall_ms\n";
  for (const SweepRow& r : rows)
    out << r.axis << ',' << format_double(r.value) << ',' << r.strategy << ',' << r.status << ','
        << r.iterations << ',' << r.l_iters << ',' << r.n_iters << ',' << r.violations << ','
        << format_double(r.wall_ms) << '\n';
}

/// Indicator-to-error ratio series recomputed from an iteration log, for
/// plotting. eff_index is carried through from the log's Newton rows.
inline void write_report_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
  out << "step,iter,scheme,eta_lin,ratio_LN,ratio_NL,ratio_LL,C_N,eff_index\n";
  for (const IterationRecord& r : records) {
    auto ratio = [&](const std::optional<double>& v) -> std::string {
      if (!v || r.eta_lin == 0.0) return std::string();
      return format_double(*v / r.eta_lin);
    };
    out << r.step << ',' << r.iter << ',' << r.scheme << ',' << format_double(r.eta_lin) << ','
        << ratio(r.eta_ln) << ',' << ratio(r.eta_nl) << ',' << ratio(r.eta_ll) << ','
        << format_optional(r.c_n) << ',' << format_optional(r.eff_index) << '\n';
  }
}

namespace detail {

/// Pointwise value expression for case files:
///   const <v>            -> v
///   affine <a> <bx> <bz> -> a + bx*x + bz*z
///   ramp <a> <b> <t1> <c>-> a + b*t while t <= t1, then c
inline std::function<double(double, double, double)> parse_value_expr(const std::string& text) {
  std::istringstream ss(text);
  std::string kind;
  ss >> kind;
  auto want = [&](int n) {
    std::vector<double> v(n);
    for (double& x : v)
      if (!(ss >> x)) throw std::runtime_error("value expression '" + text + "': expected number");
    return v;
  };
  if (kind == "const") {
    const auto v = want(1);
    return [=](double, double, double) { return v[0]; };
  }
  if (kind == "affine") {
    const auto v = want(3);
    return [=](double, double x, double z) { return v[0] + v[1] * x + v[2] * z; };
  }
  if (kind == "ramp") {
    const auto v = want(4);
    return [=](double t, double, double) { return t <= v[2] ? v[0] + v[1] * t : v[3]; };
  }
  throw std::runtime_error("value expression '" + text + "': unknown kind '" + kind + "'");
}

}  // namespace detail

/// Flat key-value case description. Lines are `key = value`; '#' starts a
/// comment. Geometry, discretization and retention parameters are scalars;
/// initial/source/dirichlet_* take the value expressions documented above,
/// with dirichlet_{bottom,right,top,left} attaching to whole sides.
inline CaseSpec<VanGenuchtenModel> read_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read case file " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto take = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(path + ": missing key '" + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_or = [&](const std::string& key, const std::string& dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&](const std::string& key) { return std::stod(take(key)); };

  VanGenuchtenParams p;
  p.theta_r = num("theta_r");
  p.theta_s = num("theta_s");
  p.k_s = num("k_s");
  p.alpha = num("alpha");
  p.n = num("n");

  Rect box;
  {
    std::istringstream ss(take_or("domain", "0 0 1 1"));
    if (!(ss >> box.x0 >> box.z0 >> box.x1 >> box.z1))
      throw std::runtime_error(path + ": domain wants 'x0 z0 x1 z1'");
  }

  CaseSpec<VanGenuchtenModel> spec{
      .name = take_or("name", path),
      .domain = box,
      .nx = std::stoi(take_or("nx", "20")),
      .nz = std::stoi(take_or("nz", "20")),
      .tau = std::stod(take_or("tau", "0.01")),
      .steps = std::stoi(take_or("steps", "1")),
      .model = VanGenuchtenModel(p),
      .l1 = num("l1"),
      .l2 = num("l2"),
      .initial = {},
      .source = {},
      .dirichlet = {},
      .notes = {"loaded from " + path},
  };
  {
    const auto f = detail::parse_value_expr(take("initial"));
    spec.initial = [f](double x, double z) { return f(0.0, x, z); };
  }
  if (kv.count("source")) spec.source = detail::parse_value_expr(take("source"));
  const std::pair<std::string, int> sides[] = {
      {"dirichlet_bottom", 0}, {"dirichlet_right", 1}, {"dirichlet_top", 2}, {"dirichlet_left", 3}};
  for (const auto& [key, side] : sides) {
    if (!kv.count(key)) continue;
    spec.dirichlet.push_back(
        {region_side(box, side, key.substr(10)), detail::parse_value_expr(take(key))});
  }
  if (spec.dirichlet.empty())
    throw std::runtime_error(path + ": at least one dirichlet_* side required");
  if (!kv.empty()) throw std::runtime_error(path + ": unknown key '" + kv.begin()->first + "'");
  return spec;
}

}  // namespace richards
