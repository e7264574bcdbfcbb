#pragma once

// Backward-in-time solver for the double-obstacle HJBI quasi-variational
// inequality
//
//   max{ min[ -dV/dt - L V - f, V - H^c_sup V ], V - H^chi_inf V } = 0,
//   V(T, x) = g(x),
//
// (or the min/max-swapped variant when player I has priority). Each time
// step is an explicit monotone update of the continuation value followed by
// a Jacobi fixed point on the nonlocal obstacles.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvigame/grid.hpp"
#include "qvigame/operators.hpp"
#include "qvigame/problem.hpp"

namespace qvigame {

struct SolveOptions {
  double fp_tol = 1e-9;
  int fp_max_iter = 200;
  double transform_tol = 5e-6;
  /// Solve even if validate_assumptions fails (and allow empty action lists).
  bool allow_assumption_violations = false;
  /// Bounds default to the grid box when left empty.
  ValidationSettings validation;
};

struct SolveResult {
  std::vector<ValueField> stack;  // N_t + 1 slices, stack[n].t == t_n
  std::vector<int> iterations;    // per slice; 0 for the terminal slice
  std::vector<double> residuals;  // per slice, see qvi_residual
  std::size_t clamp_events = 0;
  double wall_seconds = 0.0;
};

/// Obstacle fixed point did not settle, or a precondition failed.
class SolveError : public std::runtime_error {
 public:
  static constexpr std::size_t kNoSlice = static_cast<std::size_t>(-1);

  SolveError(const std::string& what, std::size_t slice = kNoSlice, double residual = 0.0)
      : std::runtime_error(what), slice_(slice), residual_(residual) {}

  [[nodiscard]] std::size_t slice() const { return slice_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  std::size_t slice_;
  double residual_;
};

struct FixedPointOutcome {
  std::vector<double> values;
  int iterations = 0;
  double last_change = 0.0;
  bool converged = false;
};

/// Discrete operators of one problem on one grid.
class QviScheme {
 public:
  QviScheme(const ProblemSpec& spec, const Grid& grid);

  [[nodiscard]] const ProblemSpec& spec() const { return *spec_; }
  [[nodiscard]] const Grid& grid() const { return *grid_; }
  [[nodiscard]] const InterventionOperator& sup_operator() const { return sup_; }
  [[nodiscard]] const InterventionOperator& inf_operator() const { return inf_; }
  [[nodiscard]] const LocalOperator& local_operator() const { return local_; }

  /// Explicit step from slice n+1 to slice n:
  ///   V_cont = V_{n+1} + dt (L V_{n+1} + f(t_{n+1}, .)).
  void continuation(std::span<const double> next, std::size_t n, std::span<double> out) const;

  /// Same step for Gamma = exp(t) V:
  ///   Gamma_cont = exp(-dt) (Gamma_{n+1} + dt (L Gamma_{n+1} + exp(t_{n+1}) f)).
  void transformed_continuation(std::span<const double> next, std::size_t n,
                                std::span<double> out) const;

  /// One application of the obstacle map at time t:
  /// player II priority: min(H_inf W, max(H_sup W, V_cont));
  /// player I priority:  max(H_sup W, min(H_inf W, V_cont)).
  void clip(std::span<const double> w, std::span<const double> v_cont,
            std::span<const double> costs_I, std::span<const double> costs_II,
            std::span<double> out) const;

  /// Iterates clip from `initial` until the sup-norm change drops below tol.
  /// Costs are evaluated at t and multiplied by cost_scale.
  [[nodiscard]] FixedPointOutcome obstacle_fixed_point(std::span<const double> v_cont,
                                                       std::vector<double> initial, double t,
                                                       double tol, int max_iter,
                                                       double cost_scale = 1.0) const;

 private:
  const ProblemSpec* spec_;
  const Grid* grid_;
  InterventionOperator sup_;
  InterventionOperator inf_;
  LocalOperator local_;
  std::vector<double> coords_;
  mutable std::vector<double> scratch_sup_;
  mutable std::vector<double> scratch_inf_;
  mutable std::vector<double> scratch_local_;
};

/// Solves the QVI backward from V(T) = g. Throws SolveError if the CFL
/// bound or the standing assumptions fail (unless overridden), or if a
/// slice's fixed point does not converge within fp_max_iter.
[[nodiscard]] SolveResult solve_backward(const ProblemSpec& spec, const Grid& grid,
                                         const SolveOptions& opts);

/// Solves the equivalent equation for Gamma(t,x) = exp(t) V(t,x) and maps
/// the stack back to V = exp(-t) Gamma.
[[nodiscard]] SolveResult solve_backward_transformed(const ProblemSpec& spec, const Grid& grid,
                                                     const SolveOptions& opts);

/// Per-slice max of the discrete QVI residual. Slices n < N use interior
/// nodes and the backward-difference PDE residual (V_n - V_cont) / dt; the
/// terminal slice reports max |V(T) - g| over all nodes.
[[nodiscard]] std::vector<double> qvi_residual(const SolveResult& result,
                                               const ProblemSpec& spec, const Grid& grid);

/// T * max|f| + max|g| over grid nodes and slice times.
[[nodiscard]] double value_bound(const ProblemSpec& spec, const Grid& grid);

/// Largest |a - b| over all slices and nodes.
[[nodiscard]] double max_stack_difference(const SolveResult& a, const SolveResult& b);

}  // namespace qvigame
