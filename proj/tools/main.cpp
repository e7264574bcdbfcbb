#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli.hpp"

namespace {

void add_simulation_flags(CLI::App* sub, qvigame::cli::SimulateArgs& a, std::string& x0) {
  sub->add_option("config", a.config, "Problem configuration file")->required();
  sub->add_option("--solve-dir", a.solve_dir, "Directory written by `solve`")->required();
  sub->add_option("--paths", a.paths, "Number of Monte Carlo paths");
  sub->add_option("--seed", a.seed, "Philox key");
  sub->add_option("--substeps", a.substeps, "Euler steps per grid time step");
  sub->add_option("--t0", a.t0, "Start time (snapped to a grid slice)");
  sub->add_option("--x0", x0, "Start point, comma separated");
  sub->add_option("--allowance", a.allowance, "Discretization allowance added to 3 stderr");
  sub->add_option("--workers", a.workers, "Worker threads (default: QVIGAME_WORKERS or all cores)");
  sub->add_option("--out", a.out, "Write the JSON report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = qvigame::cli;
  CLI::App app{"Solve and verify impulse-control games via a double-obstacle QVI"};
  app.require_subcommand(1);

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check the standing assumptions; JSON to stdout");
  validate->add_option("config", validate_config, "Problem configuration file")->required();

  cli::SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve backward and write value, policy and manifest");
  solve->add_option("config", solve_args.config, "Problem configuration file")->required();
  solve->add_option("--out", solve_args.out_dir, "Output directory")->required();
  solve->add_flag("--force", solve_args.force, "Overwrite existing output");

  cli::SimulateArgs sim_args;
  std::string sim_x0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo under the extracted policy");
  add_simulation_flags(simulate, sim_args, sim_x0);
  simulate->add_option("--dpp-at", sim_args.dpp_at, "Also check the DPP residual at this time");
  simulate->add_option("--trace", sim_args.trace_paths, "Number of paths to trace");
  simulate->add_option("--trace-csv", sim_args.trace_csv, "Trace output file");

  cli::SimulateArgs dpp_args;
  std::string dpp_x0;
  auto* dpp = app.add_subcommand("check-dpp", "Dynamic-programming residual at an intermediate time");
  add_simulation_flags(dpp, dpp_args, dpp_x0);
  dpp->add_option("--at", dpp_args.dpp_at, "Intermediate grid time s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  auto with_x0 = [](cli::SimulateArgs& a, const std::string& text) {
    if (!text.empty()) a.x0 = cli::parse_point(text);
  };
  try {
    if (*validate) return cli::cmd_validate(validate_config, std::cout, std::cerr);
    if (*solve) return cli::cmd_solve(solve_args, std::cout, std::cerr);
    if (*simulate) {
      with_x0(sim_args, sim_x0);
      return cli::cmd_simulate(sim_args, std::cout, std::cerr);
    }
    if (*dpp) {
      with_x0(dpp_args, dpp_x0);
      return cli::cmd_check_dpp(dpp_args, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return cli::kExitUsage;
}
