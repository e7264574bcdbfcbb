#include "qvigame/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace qvigame {

namespace {

double sup_norm_change(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> sample_terminal(const ProblemSpec& spec, const Grid& grid) {
  std::vector<double> g(grid.node_count());
  Vector x;
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    grid.point(p, x);
    g[p] = spec.terminal(x);
  }
  return g;
}

void check_preconditions(const ProblemSpec& spec, const Grid& grid, const SolveOptions& opts) {
  spec.check_well_formed(opts.allow_assumption_violations);
  if (grid.dim() != spec.dim) throw SolveError("grid dimension does not match the problem");
  if (std::abs(grid.horizon() - spec.horizon) > 1e-12 * spec.horizon) {
    throw SolveError("grid horizon does not match the problem");
  }
  const auto cfl = check_cfl(spec, grid);
  if (!cfl.ok) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "dt = " << grid.dt() << " exceeds the CFL bound dt_max = " << cfl.dt_max;
    throw SolveError(msg.str());
  }
  if (!(opts.fp_tol > 0.0) || opts.fp_max_iter < 1) {
    throw SolveError("fp_tol must be positive and fp_max_iter at least 1");
  }
  if (!opts.allow_assumption_violations) {
    ValidationSettings vs = opts.validation;
    if (vs.lower.empty()) vs.lower = grid.lower();
    if (vs.upper.empty()) vs.upper = grid.upper();
    const auto report = validate_assumptions(spec, vs);
    {
      std::string failed;
      // Strict subadditivity only matters for uniqueness; it is reported
      // by validate but does not block a solve.
      for (const auto& c : report.checks) {
        if (!c.passed && c.name != checks::kStrictSubadditive) {
          failed += (failed.empty() ? "" : ", ") + c.name;
        }
      }
      if (!failed.empty()) throw SolveError("standing assumptions violated: " + failed);
    }
  }
}

/// Counts nodes of a solved slice where a binding obstacle's optimal action
/// had to be clamped into the box.
std::size_t count_clamped(const QviScheme& scheme, std::span<const double> w, double t,
                          double cost_scale, double tol) {
  const auto& sup = scheme.sup_operator();
  const auto& inf = scheme.inf_operator();
  if (sup.stencil().clamped_pairs() == 0 && inf.stencil().clamped_pairs() == 0) return 0;
  const auto cI = sup.costs(t, cost_scale);
  const auto cII = inf.costs(t, cost_scale);
  std::vector<double> hs(w.size());
  std::vector<double> hi(w.size());
  sup.apply(w, cI, hs);
  inf.apply(w, cII, hi);
  std::size_t count = 0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    const bool ii_binds = hi[p] - w[p] <= tol;
    const bool i_binds = w[p] - hs[p] <= tol;
    if (!ii_binds && !i_binds) continue;
    const bool ii_first = scheme.spec().priority == Priority::PlayerII;
    const bool use_ii = ii_first ? ii_binds : !i_binds;
    const auto choice = use_ii ? inf.best(p, w, cII, tol) : sup.best(p, w, cI, tol);
    if (choice.clamped) ++count;
  }
  return count;
}

enum class Route { Direct, Transformed };

SolveResult solve_impl(const ProblemSpec& spec, const Grid& grid, const SolveOptions& opts,
                       Route route) {
  const auto start = std::chrono::steady_clock::now();
  check_preconditions(spec, grid, opts);

  const QviScheme scheme(spec, grid);
  const std::size_t N = grid.time_steps();
  const std::size_t n_nodes = grid.node_count();

  SolveResult result;
  result.stack.resize(N + 1);
  result.iterations.assign(N + 1, 0);

  std::vector<double> terminal = sample_terminal(spec, grid);
  if (route == Route::Transformed) {
    const double e = std::exp(grid.time(N));
    for (double& v : terminal) v *= e;
  }
  result.stack[N] = ValueField{grid.time(N), std::move(terminal)};

  std::vector<double> v_cont(n_nodes);
  for (std::size_t step = N; step-- > 0;) {
    const double t = grid.time(step);
    const double scale = route == Route::Transformed ? std::exp(t) : 1.0;
    const double tol = opts.fp_tol * scale;
    if (route == Route::Direct) {
      scheme.continuation(result.stack[step + 1].values, step, v_cont);
    } else {
      scheme.transformed_continuation(result.stack[step + 1].values, step, v_cont);
    }
    auto fp = scheme.obstacle_fixed_point(v_cont, v_cont, t, tol, opts.fp_max_iter, scale);
    if (!fp.converged) {
      std::ostringstream msg;
      msg << "obstacle fixed point did not converge at slice " << step << " (t = " << t
          << ") after " << fp.iterations << " iterations; last change " << fp.last_change;
      throw SolveError(msg.str(), step, fp.last_change);
    }
    result.clamp_events += count_clamped(scheme, fp.values, t, scale, 10.0 * tol);
    result.iterations[step] = fp.iterations;
    result.stack[step] = ValueField{t, std::move(fp.values)};
  }

  if (route == Route::Transformed) {
    for (auto& slice : result.stack) {
      const double e = std::exp(-slice.t);
      for (double& v : slice.values) v *= e;
    }
  }

  result.residuals = qvi_residual(result, spec, grid);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

QviScheme::QviScheme(const ProblemSpec& spec, const Grid& grid)
    : spec_(&spec),
      grid_(&grid),
      sup_(spec, grid, Player::I),
      inf_(spec, grid, Player::II),
      local_(spec, grid),
      scratch_sup_(grid.node_count()),
      scratch_inf_(grid.node_count()),
      scratch_local_(grid.node_count()) {
  coords_.resize(grid.node_count() * grid.dim());
  Vector x;
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    grid.point(p, x);
    std::copy(x.begin(), x.end(), coords_.begin() + static_cast<std::ptrdiff_t>(p * grid.dim()));
  }
}

void QviScheme::continuation(std::span<const double> next, std::size_t n,
                             std::span<double> out) const {
  const double t_next = grid_->time(n + 1);
  const double dt = t_next - grid_->time(n);
  const std::size_t d = grid_->dim();
  local_.apply(next, t_next, scratch_local_);
  for (std::size_t p = 0; p < next.size(); ++p) {
    const std::span<const double> x(coords_.data() + p * d, d);
    out[p] = next[p] + dt * (scratch_local_[p] + spec_->running(t_next, x));
  }
}

void QviScheme::transformed_continuation(std::span<const double> next, std::size_t n,
                                         std::span<double> out) const {
  const double t_next = grid_->time(n + 1);
  const double dt = t_next - grid_->time(n);
  const double growth = std::exp(t_next);
  const double decay = std::exp(-dt);
  const std::size_t d = grid_->dim();
  local_.apply(next, t_next, scratch_local_);
  for (std::size_t p = 0; p < next.size(); ++p) {
    const std::span<const double> x(coords_.data() + p * d, d);
    out[p] = decay * (next[p] + dt * (scratch_local_[p] + growth * spec_->running(t_next, x)));
  }
}

void QviScheme::clip(std::span<const double> w, std::span<const double> v_cont,
                     std::span<const double> costs_I, std::span<const double> costs_II,
                     std::span<double> out) const {
  sup_.apply(w, costs_I, scratch_sup_);
  inf_.apply(w, costs_II, scratch_inf_);
  if (spec_->priority == Priority::PlayerII) {
    for (std::size_t p = 0; p < w.size(); ++p) {
      out[p] = std::min(scratch_inf_[p], std::max(scratch_sup_[p], v_cont[p]));
    }
  } else {
    for (std::size_t p = 0; p < w.size(); ++p) {
      out[p] = std::max(scratch_sup_[p], std::min(scratch_inf_[p], v_cont[p]));
    }
  }
}

FixedPointOutcome QviScheme::obstacle_fixed_point(std::span<const double> v_cont,
                                                  std::vector<double> initial, double t,
                                                  double tol, int max_iter,
                                                  double cost_scale) const {
  const auto cI = sup_.costs(t, cost_scale);
  const auto cII = inf_.costs(t, cost_scale);
  FixedPointOutcome out;
  out.values = std::move(initial);
  std::vector<double> next(out.values.size());
  while (out.iterations < max_iter) {
    clip(out.values, v_cont, cI, cII, next);
    ++out.iterations;
    out.last_change = sup_norm_change(next, out.values);
    out.values.swap(next);
    if (out.last_change < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

SolveResult solve_backward(const ProblemSpec& spec, const Grid& grid, const SolveOptions& opts) {
  return solve_impl(spec, grid, opts, Route::Direct);
}

SolveResult solve_backward_transformed(const ProblemSpec& spec, const Grid& grid,
                                       const SolveOptions& opts) {
  return solve_impl(spec, grid, opts, Route::Transformed);
}

std::vector<double> qvi_residual(const SolveResult& result, const ProblemSpec& spec,
                                 const Grid& grid) {
  const QviScheme scheme(spec, grid);
  const std::size_t N = grid.time_steps();
  const std::size_t n_nodes = grid.node_count();
  std::vector<double> residuals(N + 1, 0.0);

  const auto g = sample_terminal(spec, grid);
  const auto& top = result.stack[N].values;
  for (std::size_t p = 0; p < n_nodes; ++p) {
    residuals[N] = std::max(residuals[N], std::abs(top[p] - g[p]));
  }

  std::vector<double> v_cont(n_nodes);
  std::vector<double> hs(n_nodes);
  std::vector<double> hi(n_nodes);
  for (std::size_t n = 0; n < N; ++n) {
    const auto& v = result.stack[n].values;
    const double t = grid.time(n);
    const double dt = grid.time(n + 1) - t;
    scheme.continuation(result.stack[n + 1].values, n, v_cont);
    scheme.sup_operator().apply(v, scheme.sup_operator().costs(t), hs);
    scheme.inf_operator().apply(v, scheme.inf_operator().costs(t), hi);
    double worst = 0.0;
    for (std::size_t p = 0; p < n_nodes; ++p) {
      if (grid.on_boundary(p)) continue;
      const double pde = (v[p] - v_cont[p]) / dt;
      const double r = spec.priority == Priority::PlayerII
                           ? std::max(std::min(pde, v[p] - hs[p]), v[p] - hi[p])
                           : std::min(std::max(pde, v[p] - hi[p]), v[p] - hs[p]);
      worst = std::max(worst, std::abs(r));
    }
    residuals[n] = worst;
  }
  return residuals;
}

double value_bound(const ProblemSpec& spec, const Grid& grid) {
  double sup_f = 0.0;
  double sup_g = 0.0;
  Vector x;
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    grid.point(p, x);
    sup_g = std::max(sup_g, std::abs(spec.terminal(x)));
    for (std::size_t n = 0; n <= grid.time_steps(); ++n) {
      sup_f = std::max(sup_f, std::abs(spec.running(grid.time(n), x)));
    }
  }
  return spec.horizon * sup_f + sup_g;
}

double max_stack_difference(const SolveResult& a, const SolveResult& b) {
  if (a.stack.size() != b.stack.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t n = 0; n < a.stack.size(); ++n) {
    m = std::max(m, sup_norm_change(a.stack[n].values, b.stack[n].values));
  }
  return m;
}

}  // namespace qvigame
