#pragma once

// CSV and JSON encodings of solver, policy and simulation outputs.
// Floats are written with 17 significant digits so they round-trip.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "qvigame/grid.hpp"
#include "qvigame/policy.hpp"
#include "qvigame/problem.hpp"
#include "qvigame/simulator.hpp"
#include "qvigame/solver.hpp"

namespace qvigame {

[[nodiscard]] std::string format_double(double v);

/// Header `t,x1,..,xd,V`, one row per (slice, node).
void write_value_csv(std::ostream& out, const SolveResult& result, const Grid& grid);

/// Reads a stack written by write_value_csv for the same grid. Throws
/// std::runtime_error on shape or parse mismatches.
[[nodiscard]] SolveResult read_value_csv(std::istream& in, const Grid& grid);

/// Header `t,x1,..,xd,regime,a1,..,ad`; regime codes 0/1/2, actions are
/// zero for Continue.
void write_policy_csv(std::ostream& out, const PolicyMap& policy, const ProblemSpec& spec,
                      const Grid& grid);

/// Header `path,t,x1,..,xd,regime,action`.
void write_trace_csv(std::ostream& out, const SimReport& report, std::size_t dim);

[[nodiscard]] std::string validation_json(const ValidationReport& report);
/// Iterations, residuals and clamp events; no timing data.
[[nodiscard]] std::string solve_summary_json(const SolveResult& result, const Grid& grid);
/// Simulation report plus the |J - V(t0,x0)| <= 3 stderr + allowance check
/// and, when given, the dynamic-programming residual.
[[nodiscard]] std::string sim_report_json(const SimReport& report, double value_start,
                                          double allowance,
                                          const std::optional<DppReport>& dpp = {});
[[nodiscard]] std::string dpp_report_json(const DppReport& dpp, double allowance);

[[nodiscard]] std::string sha256_hex(std::string_view bytes);

}  // namespace qvigame
