#pragma once

// Subcommands of the qvigame tool. Each returns a process exit code:
// 0 success or pass, 1 domain failure, 2 usage, IO or parse error.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "qvigame/problem.hpp"

namespace qvigame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct SolveArgs {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  bool force = false;
};

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path solve_dir;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> substeps;
  std::optional<double> t0;
  std::optional<Vector> x0;
  std::optional<double> dpp_at;
  std::optional<double> allowance;
  std::optional<unsigned> workers;
  std::size_t trace_paths = 0;
  std::filesystem::path out;        // empty: stdout
  std::filesystem::path trace_csv;  // empty: no trace
};

int cmd_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
/// Like simulate, but stops at s = dpp_at and reports only the DPP residual.
int cmd_check_dpp(const SimulateArgs& args, std::ostream& out, std::ostream& err);

/// Parses "a,b,c" into a vector; throws std::invalid_argument.
[[nodiscard]] Vector parse_point(const std::string& text);

}  // namespace qvigame::cli
