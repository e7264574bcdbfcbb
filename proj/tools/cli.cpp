#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qvigame/config.hpp"
#include "qvigame/grid.hpp"
#include "qvigame/io.hpp"
#include "qvigame/policy.hpp"
#include "qvigame/simulator.hpp"
#include "qvigame/solver.hpp"

#ifndef QVIGAME_VERSION
#define QVIGAME_VERSION "unknown"
#endif

namespace qvigame::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kValueFile = "value.csv";
constexpr const char* kPolicyFile = "policy.csv";
constexpr const char* kSummaryFile = "summary.json";
constexpr const char* kManifestFile = "manifest.json";

/// Signals an exit with the given code after the message was printed.
struct Exit {
  int code;
};

struct LoadedConfig {
  RunConfig run;
  std::string digest;
};

LoadedConfig load(const fs::path& path, std::ostream& err) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    throw Exit{kExitUsage};
  }
  try {
    return {parse_config(text), sha256_hex(text)};
  } catch (const ConfigError& e) {
    err << "config error";
    if (e.line() > 0) err << " at line " << e.line();
    if (!e.field().empty()) err << " [" << e.field() << "]";
    err << ": " << e.what() << '\n';
    throw Exit{kExitUsage};
  }
}

Grid make_grid(const RunConfig& cfg, std::ostream& err) {
  try {
    return build_grid(cfg.problem, cfg.grid);
  } catch (const GridError& e) {
    err << "grid error: " << e.what() << '\n';
    throw Exit{kExitFail};
  }
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json read_manifest(const fs::path& dir, std::ostream& err) {
  const fs::path path = dir / kManifestFile;
  try {
    return json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    err << "error: cannot read manifest " << path.string() << ": " << e.what() << '\n';
    throw Exit{kExitUsage};
  }
}

std::string manifest_hash(const json& manifest, const std::string& name) {
  if (!manifest.contains("files")) return {};
  for (const auto& f : manifest["files"]) {
    if (f.value("name", "") == name) return f.value("sha256", "");
  }
  return {};
}

struct Loaded {
  LoadedConfig config;
  Grid grid;
  SolveResult result;
  PolicyMap policy;
};

/// Loads config, checks the solve directory was produced from the same
/// config bytes, and rebuilds the policy from the stored value stack.
Loaded load_solution(const SimulateArgs& args, std::ostream& err) {
  LoadedConfig lc = load(args.config, err);
  const json manifest = read_manifest(args.solve_dir, err);
  if (manifest.value("config_sha256", "") != lc.digest) {
    err << "error: config digest does not match the manifest in " << args.solve_dir.string()
        << '\n';
    throw Exit{kExitUsage};
  }
  std::string value_text;
  try {
    value_text = read_text_file(args.solve_dir / kValueFile);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    throw Exit{kExitUsage};
  }
  if (manifest_hash(manifest, kValueFile) != sha256_hex(value_text)) {
    err << "error: " << kValueFile << " does not match its manifest hash\n";
    throw Exit{kExitUsage};
  }
  Grid grid = make_grid(lc.run, err);
  SolveResult result;
  try {
    std::istringstream in(value_text);
    result = read_value_csv(in, grid);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    throw Exit{kExitUsage};
  }
  PolicyMap policy = extract_policy(result, lc.run.problem, grid, lc.run.act_tol);
  return {std::move(lc), std::move(grid), std::move(result), std::move(policy)};
}

SimConfig sim_config(const SimulateArgs& args, const RunConfig& run) {
  SimConfig sc = run.simulation;
  if (args.paths) sc.paths = *args.paths;
  if (args.seed) sc.seed = *args.seed;
  if (args.substeps) sc.substeps = *args.substeps;
  if (args.t0) sc.t0 = *args.t0;
  if (args.x0) sc.x0 = *args.x0;
  if (args.workers) sc.workers = *args.workers;
  if (sc.x0.empty()) sc.x0.assign(run.problem.dim, 0.0);
  sc.trace_paths = args.trace_paths;
  return sc;
}

void emit(const SimulateArgs& args, const std::string& payload, std::ostream& out) {
  if (args.out.empty()) {
    out << payload << '\n';
  } else {
    write_file(args.out, payload + "\n");
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Exit& e) {
    return e.code;
  } catch (const SolveError& e) {
    err << "solve error: " << e.what() << '\n';
    return kExitFail;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace

Vector parse_point(const std::string& text) {
  Vector v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double x = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw std::invalid_argument("bad number `" + item + "`");
    v.push_back(x);
  }
  if (v.empty()) throw std::invalid_argument("empty point");
  return v;
}

int cmd_validate(const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedConfig lc = load(config, err);
    const ValidationReport report = validate_assumptions(lc.run.problem, lc.run.solver.validation);
    out << validation_json(report) << '\n';
    return report.overall ? kExitOk : kExitFail;
  });
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedConfig lc = load(args.config, err);
    if (fs::exists(args.out_dir / kManifestFile) || fs::exists(args.out_dir / kValueFile)) {
      if (!args.force) {
        err << "error: " << args.out_dir.string()
            << " already holds solver output; pass --force to overwrite\n";
        return kExitUsage;
      }
    }
    const Grid grid = make_grid(lc.run, err);
    const SolveResult result = solve_backward(lc.run.problem, grid, lc.run.solver);
    const PolicyMap policy = extract_policy(result, lc.run.problem, grid, lc.run.act_tol);

    std::ostringstream value_csv;
    write_value_csv(value_csv, result, grid);
    std::ostringstream policy_csv;
    write_policy_csv(policy_csv, policy, lc.run.problem, grid);
    const std::vector<std::pair<std::string, std::string>> files = {
        {kValueFile, value_csv.str()},
        {kPolicyFile, policy_csv.str()},
        {kSummaryFile, solve_summary_json(result, grid) + "\n"},
    };

    fs::create_directories(args.out_dir);
    json manifest;
    manifest["tool"] = "qvigame";
    manifest["version"] = QVIGAME_VERSION;
    manifest["config"] = fs::absolute(args.config).string();
    manifest["config_sha256"] = lc.digest;
    manifest["created_utc"] = utc_timestamp();
    manifest["wall_seconds"] = result.wall_seconds;
    manifest["files"] = json::array();
    for (const auto& [name, bytes] : files) {
      write_file(args.out_dir / name, bytes);
      manifest["files"].push_back({{"name", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    write_file(args.out_dir / kManifestFile, manifest.dump(2) + "\n");

    double max_res = 0.0;
    for (std::size_t n = 0; n + 1 < result.residuals.size(); ++n) {
      max_res = std::max(max_res, result.residuals[n]);
    }
    out << "solved " << grid.time_steps() << " steps x " << grid.node_count()
        << " nodes, max residual " << format_double(max_res) << ", wrote "
        << args.out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded s = load_solution(args, err);
    const RunConfig& run = s.config.run;
    const SimConfig sc = sim_config(args, run);
    const double allowance = args.allowance.value_or(run.allowance);
    const SimReport report = simulate(run.problem, s.grid, s.result, s.policy, sc);
    const double v0 = value_at(s.result, s.grid, report.start_slice, sc.x0);

    std::optional<DppReport> dpp;
    const std::optional<double> dpp_at = args.dpp_at ? args.dpp_at : run.dpp_at;
    if (dpp_at) dpp = check_dpp(run.problem, s.grid, s.result, s.policy, sc, *dpp_at);

    emit(args, sim_report_json(report, v0, allowance, dpp), out);
    if (!args.trace_csv.empty()) {
      std::ostringstream trace;
      write_trace_csv(trace, report, run.problem.dim);
      write_file(args.trace_csv, trace.str());
    }

    bool pass = std::abs(report.J_mean - v0) <= 3.0 * report.J_stderr + allowance;
    if (dpp) pass = pass && std::abs(dpp->residual) <= 3.0 * dpp->standard_error + allowance;
    return pass ? kExitOk : kExitFail;
  });
}

int cmd_check_dpp(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Loaded s = load_solution(args, err);
    const RunConfig& run = s.config.run;
    const std::optional<double> at = args.dpp_at ? args.dpp_at : run.dpp_at;
    if (!at) {
      err << "error: check-dpp needs --at or simulation.dpp_at\n";
      return kExitUsage;
    }
    const SimConfig sc = sim_config(args, run);
    const double allowance = args.allowance.value_or(run.allowance);
    const DppReport dpp = check_dpp(run.problem, s.grid, s.result, s.policy, sc, *at);
    emit(args, dpp_report_json(dpp, allowance), out);
    return std::abs(dpp.residual) <= 3.0 * dpp.standard_error + allowance ? kExitOk : kExitFail;
  });
}

}  // namespace qvigame::cli
