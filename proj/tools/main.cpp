// Command-line frontend: run a benchmark case, sweep a discretization axis
// across iteration strategies, or post-process an iteration log into
// indicator-ratio series.

#include <atomic>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "richards/richards.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace richards;

constexpr const char* kVersion = "1.0.0";

struct CommonOptions {
  std::string case_id = "1";
  bool case2_alt = false;
  int nx = 0, nz = 0;       // 0: keep the case default
  double tau = 0.0;         // 0: keep
  int steps = 0;            // 0: keep
  double l_value = 0.0;     // 0: case L1
  double ctol = 1.5;
  double stop_tol = 1e-7;
  double epsilon_deg = 0.0;  // 0: solver default
  bool eqflux = true;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--case", o.case_id, "Builtin case id (1|2|3) or case file path");
  cmd->add_flag("--case2-alt-params", o.case2_alt,
                "Case 2: use the alternate silt-loam parameter column");
  cmd->add_option("--nx", o.nx, "Cells along x (default: case value)");
  cmd->add_option("--nz", o.nz, "Cells along z (default: nx, else case value)");
  cmd->add_option("--tau", o.tau, "Time step size (default: case value)");
  cmd->add_option("--steps", o.steps, "Number of time steps (default: case value)");
  cmd->add_option("--L", o.l_value, "L-scheme stabilization (default: case L1)");
  cmd->add_option("--ctol", o.ctol, "Switch threshold for adaptive L/N")->capture_default_str();
  cmd->add_option("--stop-tol", o.stop_tol, "Stopping tolerance on eta_lin")->capture_default_str();
  cmd->add_option("--epsilon-deg", o.epsilon_deg,
                  "Degeneracy cutoff for theta' (default: 1e-4 * sup theta')");
  cmd->add_flag("--eqflux,!--no-eqflux", o.eqflux,
                "Equilibrated-flux correction on degenerate elements (default: on)");
  cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
}

CaseSpec<VanGenuchtenModel> resolve_case(const CommonOptions& o) {
  CaseSpec<VanGenuchtenModel> spec = fs::exists(o.case_id) && !fs::is_directory(o.case_id)
                                         ? read_case_file(o.case_id)
                                         : builtin_case(o.case_id, o.case2_alt);
  if (o.nx > 0) {
    spec.nx = o.nx;
    spec.nz = o.nz > 0 ? o.nz : o.nx;
  } else if (o.nz > 0) {
    spec.nz = o.nz;
  }
  if (o.tau > 0.0) spec.tau = o.tau;
  if (o.steps > 0) spec.steps = o.steps;
  return spec;
}

SolverConfig make_config(const CommonOptions& o, Strategy strategy) {
  SolverConfig cfg;
  cfg.strategy = strategy;
  if (o.l_value > 0.0) cfg.l_value = o.l_value;
  cfg.c_tol = o.ctol;
  cfg.stop_tol = o.stop_tol;
  if (o.epsilon_deg > 0.0) cfg.epsilon_deg = o.epsilon_deg;
  cfg.use_eqflux = o.eqflux;
  return cfg;
}

Strategy parse_strategy(const std::string& s) {
  if (s == "l") return Strategy::PureL;
  if (s == "newton") return Strategy::PureNewton;
  if (s == "ln") return Strategy::AdaptiveLN;
  if (s == "ladapt") return Strategy::AdaptiveL;
  throw CLI::ValidationError("--strategy", "unknown strategy '" + s + "'");
}

std::string summary_line(const RunReport& r, Strategy strategy) {
  std::ostringstream os;
  if (!r.converged) {
    os << "diverged at step " << r.failed_step << " after " << r.total_iters << " iterations";
  } else {
    os << r.total_iters << " iterations";
    if (strategy == Strategy::AdaptiveLN) os << " (" << r.total_l << "/" << r.total_n << ")";
  }
  return os.str();
}

std::string timestamp_utc() {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json config_json(const CaseSpec<VanGenuchtenModel>& spec, const SolverConfig& cfg,
                 const std::string& strategy) {
  const auto& p = spec.model.params();
  return json{{"case", spec.name},
              {"strategy", strategy},
              {"nx", spec.nx},
              {"nz", spec.nz},
              {"tau", spec.tau},
              {"steps", spec.steps},
              {"L", std::isnan(cfg.l_value) ? spec.l1 : cfg.l_value},
              {"ctol", cfg.c_tol},
              {"stop_tol", cfg.stop_tol},
              {"epsilon_deg", std::isnan(cfg.epsilon_deg)
                                  ? 1e-4 * spec.model.sup_theta_prime()
                                  : cfg.epsilon_deg},
              {"eqflux", cfg.use_eqflux},
              {"retention", {{"theta_r", p.theta_r},
                             {"theta_s", p.theta_s},
                             {"k_s", p.k_s},
                             {"alpha", p.alpha},
                             {"n", p.n}}},
              {"notes", spec.notes}};
}

int cmd_run(const CommonOptions& o, const std::string& strategy_name,
            const std::string& invocation) {
  const Strategy strategy = parse_strategy(strategy_name);
  const CaseSpec<VanGenuchtenModel> spec = resolve_case(o);
  const SolverConfig cfg = make_config(o, strategy);

  fs::create_directories(o.out_dir);
  const std::string manifest_path = (fs::path(o.out_dir) / "manifest.json").string();
  const std::string csv_path = (fs::path(o.out_dir) / "iterations.csv").string();
  const std::string vtk_path = (fs::path(o.out_dir) / "solution.vtk").string();

  json manifest{{"invocation", invocation},
                {"version", kVersion},
                {"timestamp", timestamp_utc()},
                {"config", config_json(spec, cfg, strategy_name)},
                {"outputs", {manifest_path, csv_path, vtk_path}},
                {"status", "running"}};
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';

  const RunReport report = run_case(spec, cfg);

  write_iterations_csv(csv_path, report);
  const Mesh mesh = Mesh::structured(spec.nx, spec.nz, spec.domain);
  write_vtk(vtk_path, mesh, report.final_field, spec.model, spec.name);

  manifest["status"] = report.converged ? "converged" : "diverged";
  manifest["summary"] = summary_line(report, strategy);
  manifest["iterations"] = report.total_iters;
  manifest["l_iterations"] = report.total_l;
  manifest["n_iterations"] = report.total_n;
  manifest["guarantee_violations"] = report.violations.size();
  if (!report.converged) {
    manifest["failed_step"] = report.failed_step;
    manifest["failure"] = report.failure;
  }
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';

  std::cout << summary_line(report, strategy) << '\n';
  return report.converged ? 0 : 2;
}

struct SweepEntry {
  double value = 0.0;
  std::string strategy;
};

int cmd_sweep(const CommonOptions& o, const std::string& axis, std::vector<double> values,
              std::vector<std::string> strategies, int jobs, const std::string& invocation) {
  if (values.empty()) throw CLI::ValidationError("--values", "value list must not be empty");
  if (strategies.empty())
    throw CLI::ValidationError("--strategy", "at least one strategy required");
  if (axis != "mesh" && axis != "tau")
    throw CLI::ValidationError("--axis", "axis must be 'mesh' or 'tau'");

  std::vector<SweepEntry> entries;
  for (const std::string& s : strategies)
    for (double v : values) entries.push_back({v, s});

  fs::create_directories(o.out_dir);
  const std::string table_path = (fs::path(o.out_dir) / "sweep.csv").string();
  const std::string manifest_path = (fs::path(o.out_dir) / "sweep_manifest.json").string();

  json manifest{{"invocation", invocation},
                {"version", kVersion},
                {"timestamp", timestamp_utc()},
                {"axis", axis},
                {"values", values},
                {"strategies", strategies},
                {"outputs", {manifest_path, table_path}},
                {"status", "running"}};
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';

  std::vector<SweepRow> rows(entries.size());
  std::vector<std::string> logs(entries.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex io_mutex;

  auto worker = [&]() {
    for (std::size_t i = cursor.fetch_add(1); i < entries.size(); i = cursor.fetch_add(1)) {
      const SweepEntry& e = entries[i];
      CommonOptions local = o;
      if (axis == "mesh")
        local.nx = static_cast<int>(e.value);
      else
        local.tau = e.value;

      Strategy strategy;
      if (e.strategy == "l1" || e.strategy == "l2") {
        strategy = Strategy::PureL;
        local.l_value = 0.0;  // resolved from the case below
      } else {
        strategy = parse_strategy(e.strategy);
      }
      const CaseSpec<VanGenuchtenModel> spec = resolve_case(local);
      SolverConfig cfg = make_config(local, strategy);
      if (e.strategy == "l1") cfg.l_value = spec.l1;
      if (e.strategy == "l2") cfg.l_value = spec.l2;

      const RunReport report = run_case(spec, cfg);

      std::ostringstream name;
      name << spec.name << '-' << e.strategy << '-' << axis << '-' << format_double(e.value)
           << ".csv";
      const std::string log_path = (fs::path(o.out_dir) / name.str()).string();
      write_iterations_csv(log_path, report);

      rows[i] = SweepRow{axis,
                         e.value,
                         e.strategy,
                         report.converged ? "converged" : "diverged",
                         report.total_iters,
                         report.total_l,
                         report.total_n,
                         static_cast<int>(report.violations.size()),
                         report.wall_ms};
      logs[i] = log_path;
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << spec.name << ' ' << e.strategy << ' ' << axis << '=' << format_double(e.value)
                << ": " << rows[i].status << ", " << rows[i].iterations << " iterations\n";
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(entries.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  write_sweep_csv(table_path, rows);
  manifest["status"] = "done";
  manifest["entry_logs"] = logs;
  std::ofstream(manifest_path) << manifest.dump(2) << '\n';
  std::cout << "sweep table: " << table_path << '\n';
  return 0;
}

int cmd_report(const std::string& input, const std::string& output) {
  const std::vector<IterationRecord> records = read_iterations_csv(input);
  if (output.empty()) {
    write_report_csv(std::cout, records);
  } else {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    write_report_csv(out, records);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::ostringstream inv;
  for (int i = 0; i < argc; ++i) inv << (i ? " " : "") << argv[i];

  CLI::App app{"Variably saturated flow solver with adaptive linearization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions run_opts;
  std::string run_strategy = "ln";
  CLI::App* run = app.add_subcommand("run", "Run one case and export logs and fields");
  add_common(run, run_opts);
  run->add_option("--strategy", run_strategy, "l|newton|ln|ladapt")->capture_default_str();

  CommonOptions sweep_opts;
  std::string sweep_axis = "mesh";
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_strategies;
  int sweep_jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "Run a case across meshes or step sizes");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", sweep_axis, "mesh|tau")->capture_default_str();
  sweep->add_option("--values", sweep_values, "Axis values (mesh: cell counts)")->required();
  sweep->add_option("--strategy", sweep_strategies, "l|l1|l2|newton|ln|ladapt (repeatable)")
      ->required();
  sweep->add_option("--jobs", sweep_jobs, "Concurrent runs")->capture_default_str();

  std::string report_input, report_output;
  CLI::App* report = app.add_subcommand("report", "Indicator ratios from an iteration log");
  report->add_option("input", report_input, "iterations.csv produced by run")->required();
  report->add_option("--out", report_output, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_opts, run_strategy, inv.str());
    if (sweep->parsed())
      return cmd_sweep(sweep_opts, sweep_axis, sweep_values, sweep_strategies, sweep_jobs,
                       inv.str());
    if (report->parsed()) return cmd_report(report_input, report_output);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
