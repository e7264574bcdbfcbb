#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "qvigame/operators.hpp"
#include "qvigame/solver.hpp"

using namespace qvigame;

namespace {

GridRequest coarse(std::size_t nodes = 81) { return fixtures::reference_grid(nodes); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("constant terminal payoff gives V = 1 everywhere") {
  const auto spec = fixtures::constant_spec();
  const Grid g = build_grid(spec, coarse());
  const auto r = solve_backward(spec, g, {});
  REQUIRE(r.stack.size() == g.time_steps() + 1);
  for (const auto& slice : r.stack) {
    for (double v : slice.values) CHECK(v == 1.0);
  }
  for (double res : qvi_residual(r, spec, g)) CHECK(res == 0.0);
  const auto tr = solve_backward_transformed(spec, g, {});
  CHECK(max_stack_difference(r, tr) <= 1e-12);
}

TEST_CASE("terminal slice equals g on the nodes") {
  const auto spec = fixtures::reference_spec();
  const Grid g = build_grid(spec, coarse());
  const auto r = solve_backward(spec, g, {});
  const auto& last = r.stack.back();
  CHECK(last.t == 1.0);
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    CHECK(last.values[p] == spec.terminal(g.point(p)));
  }
  for (std::size_t n = 0; n < r.stack.size(); ++n) CHECK(r.stack[n].t == g.time(n));
}

TEST_CASE("prohibitive costs reduce to the heat semigroup") {
  const auto spec = fixtures::heat_spec();
  SolveOptions opts;
  opts.allow_assumption_violations = true;
  const Grid g = build_grid(spec, coarse(161));
  const auto r = solve_backward(spec, g, opts);
  for (double x0 : {-1.0, 0.0, 1.0}) {
    CAPTURE(x0);
    const double oracle = fixtures::heat_quadrature_oracle(fixtures::unit_hat, x0, 0.5, 1.0);
    const double v = interpolate(g, r.stack.front().values, Vector{x0});
    CHECK(std::abs(v - oracle) <= 2e-3);
  }
}

TEST_CASE("quadrature and Monte Carlo heat oracles agree") {
  for (double x0 : {-1.0, 0.0, 0.5}) {
    const double q = fixtures::heat_quadrature_oracle(fixtures::unit_hat, x0, 0.5, 1.0);
    const auto mc = fixtures::heat_mc_oracle(fixtures::unit_hat, x0, 0.5, 1.0, 200000, 99);
    CHECK(std::abs(q - mc.mean) <= 4.0 * mc.stderr_);
  }
}

TEST_CASE("transformed route matches the direct solve") {
  for (auto priority : {Priority::PlayerII, Priority::PlayerI}) {
    const auto spec = fixtures::reference_spec(priority);
    const Grid g = build_grid(spec, coarse());
    const auto direct = solve_backward(spec, g, {});
    const auto transformed = solve_backward_transformed(spec, g, {});
    CHECK(max_stack_difference(direct, transformed) <= 5e-6);
  }
}

TEST_CASE("tiny horizon: one explicit step away from g") {
  auto spec = fixtures::reference_spec();
  spec.horizon = 1e-4;
  GridRequest req = coarse();
  req.time_steps = 1;
  const Grid g = build_grid(spec, req);
  const auto direct = solve_backward(spec, g, {});
  const auto transformed = solve_backward_transformed(spec, g, {});
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    CHECK(std::abs(direct.stack[0].values[p] - spec.terminal(g.point(p))) <= 1e-3);
  }
  CHECK(max_stack_difference(direct, transformed) <= 5e-6);
}

TEST_CASE("discrete obstacle ordering and boundedness on the reference problem") {
  for (auto priority : {Priority::PlayerII, Priority::PlayerI}) {
    CAPTURE(static_cast<int>(priority));
    const auto spec = fixtures::reference_spec(priority);
    const Grid g = build_grid(spec, coarse());
    const SolveOptions opts;
    const auto r = solve_backward(spec, g, opts);
    const double bound = value_bound(spec, g);
    CHECK(bound == doctest::Approx(3.0 + 1.0));
    std::size_t bad = 0;
    for (const auto& slice : r.stack) {
      const auto hs = intervention_sup(slice, spec, g);
      const auto hi = intervention_inf(slice, spec, g);
      for (std::size_t p = 0; p < g.node_count(); ++p) {
        const double v = slice.values[p];
        if (std::abs(v) > bound + opts.fp_tol) ++bad;
        if (priority == Priority::PlayerII) {
          if (v > hi.values[p] + opts.fp_tol) ++bad;
          if (hi.values[p] - v > 10 * opts.fp_tol && v < hs.values[p] - opts.fp_tol) ++bad;
        } else {
          if (v < hs.values[p] - opts.fp_tol) ++bad;
          if (v - hs.values[p] > 10 * opts.fp_tol && v > hi.values[p] + opts.fp_tol) ++bad;
        }
      }
    }
    CHECK(bad == 0);
    const auto res = qvi_residual(r, spec, g);
    CHECK(res.back() == 0.0);
    CHECK(*std::max_element(res.begin(), res.end()) <= 2 * opts.fp_tol);
    CHECK(r.residuals == res);
  }
}

TEST_CASE("comparison: a larger terminal payoff never lowers the value") {
  const auto spec1 = fixtures::reference_spec();
  auto spec2 = spec1;
  GainTerm extra = spec1.terminal_gain.terms.front();
  extra.amplitude = 0.1;
  spec2.terminal_gain.terms.push_back(extra);
  const Grid g = build_grid(spec1, coarse());
  const auto v1 = solve_backward(spec1, g, {});
  const auto v2 = solve_backward(spec2, g, {});
  std::size_t violations = 0;
  for (std::size_t n = 0; n < v1.stack.size(); ++n) {
    for (std::size_t p = 0; p < g.node_count(); ++p) {
      if (v1.stack[n].values[p] > v2.stack[n].values[p] + 1e-12) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("constant shifts of g and f move the stack predictably") {
  const auto spec = fixtures::reference_spec();
  const Grid g = build_grid(spec, coarse());
  const auto base = solve_backward(spec, g, {});

  auto shifted_g = spec;
  shifted_g.terminal_gain.terms.push_back({GainFamily::Constant, 0.75, {}, 1.0, 0.0, 0.0});
  const auto rg = solve_backward(shifted_g, g, {});
  for (std::size_t n = 0; n < base.stack.size(); ++n) {
    for (std::size_t p = 0; p < g.node_count(); ++p) {
      CHECK(rg.stack[n].values[p] - base.stack[n].values[p] == doctest::Approx(0.75).epsilon(1e-9));
    }
  }

  // A constant running gain kappa adds kappa * (T - t).
  auto shifted_f = spec;
  shifted_f.running_gain.terms.push_back({GainFamily::Constant, 0.4, {}, 1.0, 0.0, 0.0});
  const auto rf = solve_backward(shifted_f, g, {});
  for (std::size_t n = 0; n < base.stack.size(); n += 7) {
    const double expected = 0.4 * (1.0 - g.time(n));
    for (std::size_t p = 0; p < g.node_count(); ++p) {
      CHECK(rf.stack[n].values[p] - base.stack[n].values[p] ==
            doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("per-slice fixed point is independent of the initial guess") {
  const auto spec = fixtures::reference_spec();
  const Grid g = build_grid(spec, coarse());
  const auto r = solve_backward(spec, g, {});
  const QviScheme scheme(spec, g);
  std::vector<double> v_cont(g.node_count());
  for (std::size_t n = 0; n < g.time_steps(); n += 9) {
    scheme.continuation(r.stack[n + 1].values, n, v_cont);
    std::vector<double> up = v_cont;
    std::vector<double> down = v_cont;
    for (auto& v : up) v += 1.0;
    for (auto& v : down) v -= 1.0;
    const auto a = scheme.obstacle_fixed_point(v_cont, up, g.time(n), 1e-9, 200);
    const auto b = scheme.obstacle_fixed_point(v_cont, down, g.time(n), 1e-9, 200);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(max_abs_diff(a.values, b.values) <= 1e-8);
    CHECK(max_abs_diff(a.values, r.stack[n].values) <= 1e-8);
  }
}

TEST_CASE("non-convergence carries the slice index") {
  auto spec = fixtures::reference_spec();
  spec.cost_II = {1e-4, 0.0};
  SolveOptions opts;
  opts.allow_assumption_violations = true;
  opts.fp_max_iter = 2;
  const Grid g = build_grid(spec, coarse());
  try {
    (void)solve_backward(spec, g, opts);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    CHECK(e.slice() < g.time_steps());
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("assumption failures block solving unless overridden") {
  auto spec = fixtures::reference_spec();
  spec.cost_II.fixed = 0.0;
  const Grid g = build_grid(spec, coarse());
  CHECK_THROWS_AS((void)solve_backward(spec, g, {}), SolveError);
  SolveOptions opts;
  opts.allow_assumption_violations = true;
  CHECK_NOTHROW((void)solve_backward(spec, g, opts));
}

TEST_CASE("strict subadditivity failure is reported but does not block") {
  auto spec = fixtures::reference_spec();
  SolveOptions opts;
  opts.validation.strict_margin = 0.2;
  const Grid g = build_grid(spec, coarse());
  CHECK_NOTHROW((void)solve_backward(spec, g, opts));
}

TEST_CASE("CFL violation is rejected by the solver") {
  const auto spec = fixtures::reference_spec();
  const Grid fine = build_grid(spec, coarse());
  auto faster = spec;
  faster.diffusion.scale = {2.0};
  CHECK_THROWS_AS((void)solve_backward(faster, fine, {}), SolveError);
}

TEST_CASE("without player II both priority conventions coincide") {
  auto s2 = fixtures::reference_spec(Priority::PlayerII);
  auto s1 = fixtures::reference_spec(Priority::PlayerI);
  s2.actions_II.actions.clear();
  s1.actions_II.actions.clear();
  SolveOptions opts;
  opts.allow_assumption_violations = true;
  const Grid g = build_grid(s2, coarse());
  const auto a = solve_backward(s2, g, opts);
  const auto b = solve_backward(s1, g, opts);
  CHECK(max_stack_difference(a, b) <= 1e-12);
}

TEST_CASE("unsolved zero stack: terminal residual is the max norm of g") {
  const auto spec = fixtures::reference_spec();
  const Grid g = build_grid(spec, coarse());
  SolveResult zero;
  for (std::size_t n = 0; n <= g.time_steps(); ++n) {
    zero.stack.push_back({g.time(n), std::vector<double>(g.node_count(), 0.0)});
  }
  const auto res = qvi_residual(zero, spec, g);
  CHECK(res.back() == 1.0);
}

TEST_CASE("repeated solves are bit-identical") {
  const auto spec = fixtures::reference_spec();
  const Grid g = build_grid(spec, coarse());
  const auto a = solve_backward(spec, g, {});
  const auto b = solve_backward(spec, g, {});
  CHECK(max_stack_difference(a, b) == 0.0);
  CHECK(a.iterations == b.iterations);
}
