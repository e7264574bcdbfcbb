#include <fstream>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "qvigame/config.hpp"
#include "qvigame/io.hpp"

namespace fs = std::filesystem;
using namespace qvigame::cli;
using nlohmann::json;

namespace {

fs::path config(const std::string& name) { return fixtures::configs_dir() / name; }

/// Reference config on an 81-node grid with a small path count.
fs::path coarse_reference(const fs::path& dir) {
  std::string text = qvigame::read_text_file(config("reference_1d.ini"));
  const auto nodes = text.find("nodes = 401");
  text.replace(nodes, 11, "nodes = 81");
  const auto paths = text.find("paths = 100000");
  text.replace(paths, 14, "paths = 2000");
  const fs::path out = dir / "coarse.ini";
  std::ofstream(out) << text;
  return out;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

template <class F>
Run capture(F&& f) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = f(out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("validate exit codes") {
  const auto ok = capture([](auto& o, auto& e) { return cmd_validate(config("reference_1d.ini"), o, e); });
  CHECK(ok.code == kExitOk);
  CHECK(json::parse(ok.out)["overall"] == true);

  const auto floor = capture([](auto& o, auto& e) { return cmd_validate(config("zero_floor_1d.ini"), o, e); });
  CHECK(floor.code == kExitFail);
  bool cost_floor_failed = false;
  const json floor_report = json::parse(floor.out);
  for (const auto& c : floor_report["checks"]) {
    if (c["name"] == "cost_floor") cost_floor_failed = c["passed"] == false;
  }
  CHECK(cost_floor_failed);

  const fs::path dir = fixtures::scratch_dir("cli_validate");
  std::string text = qvigame::read_text_file(config("reference_1d.ini"));
  const auto start = text.find("[costs]");
  const auto end = text.find("[actions]");
  text.erase(start, end - start);
  std::ofstream(dir / "no_costs.ini") << text;
  const auto broken = capture([&](auto& o, auto& e) { return cmd_validate(dir / "no_costs.ini", o, e); });
  CHECK(broken.code == kExitUsage);
  CHECK(broken.err.find("cost") != std::string::npos);

  const auto missing = capture([&](auto& o, auto& e) { return cmd_validate(dir / "nope.ini", o, e); });
  CHECK(missing.code == kExitUsage);
}

TEST_CASE("solve the constant problem") {
  const fs::path dir = fixtures::scratch_dir("cli_constant");
  const SolveArgs args{config("constant_1d.ini"), dir / "out", false};
  const auto run = capture([&](auto& o, auto& e) { return cmd_solve(args, o, e); });
  REQUIRE(run.code == kExitOk);
  std::ifstream csv(dir / "out" / "value.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,x1,V");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.substr(line.rfind(',') + 1) == "1");
    ++rows;
  }
  CHECK(rows == 401 * 2633);

  const auto again = capture([&](auto& o, auto& e) { return cmd_solve(args, o, e); });
  CHECK(again.code == kExitUsage);
  CHECK(again.err.find("--force") != std::string::npos);
}

TEST_CASE("solve reports CFL violations with dt_max") {
  const fs::path dir = fixtures::scratch_dir("cli_cfl");
  const SolveArgs args{config("cfl_violation_1d.ini"), dir / "out", false};
  const auto run = capture([&](auto& o, auto& e) { return cmd_solve(args, o, e); });
  CHECK(run.code == kExitFail);
  CHECK(run.err.find("dt_max") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("solve, simulate and check-dpp on a coarse reference") {
  const fs::path dir = fixtures::scratch_dir("cli_reference");
  const fs::path cfg = coarse_reference(dir);
  SolveArgs solve{cfg, dir / "a", false};
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_solve(solve, o, e); }).code == kExitOk);
  solve.out_dir = dir / "b";
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_solve(solve, o, e); }).code == kExitOk);

  const json ma = json::parse(qvigame::read_text_file(dir / "a" / "manifest.json"));
  const json mb = json::parse(qvigame::read_text_file(dir / "b" / "manifest.json"));
  CHECK(ma["files"] == mb["files"]);
  CHECK(ma["config_sha256"] == mb["config_sha256"]);
  for (const auto& f : ma["files"]) {
    const std::string bytes = qvigame::read_text_file(dir / "a" / f["name"].get<std::string>());
    CHECK(f["sha256"] == qvigame::sha256_hex(bytes));
  }

  SimulateArgs sim;
  sim.config = cfg;
  sim.solve_dir = dir / "a";
  sim.workers = 1;
  const auto first = capture([&](auto& o, auto& e) { return cmd_simulate(sim, o, e); });
  CHECK(first.code == kExitOk);
  const auto second = capture([&](auto& o, auto& e) { return cmd_simulate(sim, o, e); });
  CHECK(first.out == second.out);
  const json report = json::parse(first.out);
  CHECK(report["paths"] == 2000);
  CHECK(report["consistency"]["pass"] == true);

  sim.t0 = 1.0;
  sim.x0 = qvigame::Vector{0.25};
  const auto at_T = capture([&](auto& o, auto& e) { return cmd_simulate(sim, o, e); });
  CHECK(at_T.code == kExitOk);
  const json rt = json::parse(at_T.out);
  CHECK(rt["J_mean"].get<double>() == 0.75);
  CHECK(rt["J_stderr"].get<double>() == 0.0);

  sim.t0.reset();
  sim.x0.reset();
  sim.dpp_at = 0.5;
  sim.out = dir / "dpp.json";
  const auto dpp = capture([&](auto& o, auto& e) { return cmd_check_dpp(sim, o, e); });
  CHECK(dpp.code == kExitOk);
  const json dj = json::parse(qvigame::read_text_file(dir / "dpp.json"));
  CHECK(dj["s"].get<double>() == 0.5);

  sim.trace_paths = 2;
  sim.trace_csv = dir / "trace.csv";
  sim.out = dir / "sim.json";
  CHECK(capture([&](auto& o, auto& e) { return cmd_simulate(sim, o, e); }).code == kExitOk);
  CHECK(json::parse(qvigame::read_text_file(dir / "sim.json")).contains("dpp"));
  CHECK(qvigame::read_text_file(dir / "trace.csv").rfind("path,t,x1,regime,action\n", 0) == 0);
}

TEST_CASE("simulate refuses a solve directory from another config") {
  const fs::path dir = fixtures::scratch_dir("cli_mismatch");
  const fs::path cfg = coarse_reference(dir);
  const SolveArgs solve{cfg, dir / "s", false};
  REQUIRE(capture([&](auto& o, auto& e) { return cmd_solve(solve, o, e); }).code == kExitOk);
  SimulateArgs sim;
  sim.config = config("heat_1d.ini");
  sim.solve_dir = dir / "s";
  const auto run = capture([&](auto& o, auto& e) { return cmd_simulate(sim, o, e); });
  CHECK(run.code == kExitUsage);
  CHECK(run.err.find("digest") != std::string::npos);

  sim.config = cfg;
  std::ofstream(dir / "s" / "value.csv", std::ios::app) << "0,0,0\n";
  CHECK(capture([&](auto& o, auto& e) { return cmd_simulate(sim, o, e); }).code == kExitUsage);

  sim.solve_dir = dir / "missing";
  CHECK(capture([&](auto& o, auto& e) { return cmd_simulate(sim, o, e); }).code == kExitUsage);
}

TEST_CASE("parse_point") {
  CHECK(parse_point("0.5") == qvigame::Vector{0.5});
  CHECK(parse_point("1,-2.5") == qvigame::Vector{1.0, -2.5});
  CHECK_THROWS((void)parse_point("1,x"));
  CHECK_THROWS((void)parse_point(""));
}
