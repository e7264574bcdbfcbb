#pragma once

// Monte Carlo evaluation of the gain functional J under extracted feedback
// policies, plus the impulse-tail and dynamic-programming checks.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qvigame/grid.hpp"
#include "qvigame/policy.hpp"
#include "qvigame/problem.hpp"
#include "qvigame/solver.hpp"

namespace qvigame {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  std::size_t substeps = 1;  // Euler steps per PDE time step
  double t0 = 0.0;
  Vector x0;
  unsigned workers = 0;  // 0: QVIGAME_WORKERS or hardware concurrency
  std::size_t trace_paths = 0;
};

struct CostBreakdown {
  double running = 0.0;
  double costs_I = 0.0;   // costs paid by player I, <= 0
  double costs_II = 0.0;  // costs paid by player II, received by I, >= 0
  double terminal = 0.0;
};

struct TraceRow {
  std::size_t path = 0;
  double t = 0.0;
  Vector state;
  Regime regime = Regime::Continue;
  int action = -1;
};

struct SimReport {
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::size_t substeps = 1;
  std::size_t start_slice = 0;
  double t0 = 0.0;
  Vector x0;
  double J_mean = 0.0;
  double J_stderr = 0.0;
  CostBreakdown breakdown;  // means; their sum is J_mean
  std::vector<std::size_t> histogram_I;  // [k] = paths with exactly k impulses
  std::vector<std::size_t> histogram_II;
  std::vector<double> tail_I;  // [n-1] = P[N_I >= n], n >= 1
  std::vector<double> tail_II;
  std::vector<double> tail_total;  // tail_I + tail_II
  std::size_t escapes = 0;
  std::vector<TraceRow> traces;
};

struct TailCheck {
  bool nonincreasing = true;
  double C = 0.0;              // smallest C with tail_total(n) <= C / n
  std::vector<double> margins;  // C / n - tail_total(n)
};

struct DppReport {
  std::size_t slice = 0;
  double s = 0.0;
  double mean = 0.0;         // E[int f - sum c + sum chi + V(s, X_s)]
  double value_start = 0.0;  // V(t0, x0)
  double residual = 0.0;
  double standard_error = 0.0;
};

/// Worker count: explicit request, else QVIGAME_WORKERS, else hardware.
[[nodiscard]] unsigned resolve_workers(unsigned requested);

/// Euler-Maruyama simulation under `policy` from (t0, x0) to T.
[[nodiscard]] SimReport simulate(const ProblemSpec& spec, const Grid& grid,
                                 const SolveResult& result, const PolicyMap& policy,
                                 const SimConfig& cfg);

/// Requires at least 10^4 paths (std::invalid_argument otherwise).
[[nodiscard]] TailCheck check_impulse_tail(const SimReport& report);

/// Monte Carlo dynamic-programming residual between t0 and grid time s.
[[nodiscard]] DppReport check_dpp(const ProblemSpec& spec, const Grid& grid,
                                  const SolveResult& result, const PolicyMap& policy,
                                  const SimConfig& cfg, double s);

/// Multilinear interpolation of slice n of the stack at x.
[[nodiscard]] double value_at(const SolveResult& result, const Grid& grid, std::size_t n,
                              std::span<const double> x);

}  // namespace qvigame
