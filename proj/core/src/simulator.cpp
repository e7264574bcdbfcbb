#include "qvigame/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "qvigame/operators.hpp"
#include "qvigame/philox.hpp"

namespace qvigame {

namespace {

/// Outcome of one simulated path.
struct PathRecord {
  double running = 0.0;
  double costs_I = 0.0;
  double costs_II = 0.0;
  double terminal = 0.0;
  std::uint32_t impulses_I = 0;
  std::uint32_t impulses_II = 0;
  std::uint32_t escapes = 0;
};

struct EngineSetup {
  const ProblemSpec* spec;
  const Grid* grid;
  const SolveResult* result;
  const PolicyMap* policy;
  const SimConfig* cfg;
  std::size_t start;
  std::size_t stop;  // impulses and diffusion on slices [start, stop)
};

bool clamp_into(const Grid& grid, Vector& x) {
  bool clamped = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < grid.lower(i)) {
      x[i] = grid.lower(i);
      clamped = true;
    } else if (x[i] > grid.upper(i)) {
      x[i] = grid.upper(i);
      clamped = true;
    }
  }
  return clamped;
}

PathRecord run_path(const EngineSetup& e, std::size_t path, std::vector<TraceRow>* trace) {
  const ProblemSpec& spec = *e.spec;
  const Grid& grid = *e.grid;
  const std::size_t d = spec.dim;
  const std::size_t substeps = e.cfg->substeps;
  PathNormals normals(e.cfg->seed, path);
  PathRecord rec;
  Vector x = e.cfg->x0;
  Vector drift(d);
  Vector vol(d);

  for (std::size_t n = e.start; n < e.stop; ++n) {
    const double t = grid.time(n);
    const std::size_t node = grid.nearest_node(x);
    const Regime regime = e.policy->regime(n, node);
    const int action = e.policy->action(n, node);
    if (regime == Regime::ImpulseII) {
      const auto& eta = spec.actions_II.actions[static_cast<std::size_t>(action)];
      for (std::size_t i = 0; i < d; ++i) x[i] += eta[i];
      rec.costs_II += spec.cost_II(t, eta);
      ++rec.impulses_II;
    } else if (regime == Regime::ImpulseI) {
      const auto& xi = spec.actions_I.actions[static_cast<std::size_t>(action)];
      for (std::size_t i = 0; i < d; ++i) x[i] += xi[i];
      rec.costs_I -= spec.cost_I(t, xi);
      ++rec.impulses_I;
    }
    if (clamp_into(grid, x)) ++rec.escapes;
    if (trace != nullptr) trace->push_back({path, t, x, regime, action});

    const double h = (grid.time(n + 1) - t) / static_cast<double>(substeps);
    const double sqrt_h = std::sqrt(h);
    for (std::size_t k = 0; k < substeps; ++k) {
      const double tk = t + static_cast<double>(k) * h;
      rec.running += spec.running(tk, x) * h;
      for (std::size_t i = 0; i < d; ++i) {
        drift[i] = spec.drift_component(i, tk, x);
        vol[i] = spec.diffusion_diagonal(i, tk, x);
      }
      const std::uint64_t base = (static_cast<std::uint64_t>(n) * substeps + k) * d;
      for (std::size_t i = 0; i < d; ++i) {
        x[i] += drift[i] * h + vol[i] * sqrt_h * normals(base + i);
      }
      if (clamp_into(grid, x)) ++rec.escapes;
    }
  }

  if (e.stop == grid.time_steps()) {
    rec.terminal = spec.terminal(x);
  } else {
    rec.terminal = interpolate(grid, e.result->stack[e.stop].values, x);
  }
  const double total = rec.running + rec.costs_I + rec.costs_II + rec.terminal;
  if (!std::isfinite(total)) {
    throw SimulationError("non-finite payoff on path " + std::to_string(path));
  }
  if (trace != nullptr) {
    trace->push_back({path, grid.time(e.stop), x, Regime::Continue, -1});
  }
  return rec;
}

std::vector<PathRecord> run_paths(const EngineSetup& e, std::vector<TraceRow>& traces) {
  const std::size_t paths = e.cfg->paths;
  std::vector<PathRecord> records(paths);
  const std::size_t traced = std::min(paths, e.cfg->trace_paths);
  std::vector<std::vector<TraceRow>> per_path_trace(traced);

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_workers(e.cfg->workers), paths));
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 256;
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned id) {
    try {
      for (;;) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= paths) break;
        const std::size_t end = std::min(paths, begin + kChunk);
        for (std::size_t p = begin; p < end; ++p) {
          records[p] = run_path(e, p, p < traced ? &per_path_trace[p] : nullptr);
        }
      }
    } catch (...) {
      errors[id] = std::current_exception();
      next.store(paths);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  for (auto& rows : per_path_trace) {
    traces.insert(traces.end(), rows.begin(), rows.end());
  }
  return records;
}

void check_config(const ProblemSpec& spec, const Grid& grid, const SolveResult& result,
                  const PolicyMap& policy, const SimConfig& cfg) {
  if (cfg.paths == 0) throw SimulationError("paths must be at least 1");
  if (cfg.substeps == 0) throw SimulationError("substeps must be at least 1");
  if (cfg.x0.size() != spec.dim) throw SimulationError("x0 has the wrong dimension");
  if (!(cfg.t0 >= 0.0 && cfg.t0 <= spec.horizon)) throw SimulationError("t0 outside [0, T]");
  if (!grid.contains(cfg.x0)) throw SimulationError("x0 lies outside the grid");
  if (result.stack.size() != grid.time_steps() + 1 || policy.slices() != grid.time_steps() + 1 ||
      policy.nodes() != grid.node_count()) {
    throw SimulationError("solve result and policy do not match the grid");
  }
}

/// Mean and standard error of the per-path totals, summed in path order.
/// Sums are shifted by the first path's values so that identical paths give
/// an exact mean and zero variance.
std::pair<double, double> mean_and_stderr(const std::vector<PathRecord>& records,
                                          CostBreakdown& means) {
  const auto n = static_cast<double>(records.size());
  const PathRecord& k = records.front();
  CostBreakdown shifted;
  for (const auto& r : records) {
    shifted.running += r.running - k.running;
    shifted.costs_I += r.costs_I - k.costs_I;
    shifted.costs_II += r.costs_II - k.costs_II;
    shifted.terminal += r.terminal - k.terminal;
  }
  means = {k.running + shifted.running / n, k.costs_I + shifted.costs_I / n,
           k.costs_II + shifted.costs_II / n, k.terminal + shifted.terminal / n};
  const double mean = means.running + means.costs_I + means.costs_II + means.terminal;
  const double k_total = k.running + k.costs_I + k.costs_II + k.terminal;
  double sum = 0.0;
  double ss = 0.0;
  for (const auto& r : records) {
    const double dv = r.running + r.costs_I + r.costs_II + r.terminal - k_total;
    sum += dv;
    ss += dv * dv;
  }
  const double var = records.size() > 1 ? std::max(0.0, (ss - sum * sum / n) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

std::vector<double> tail_from_histogram(const std::vector<std::size_t>& hist, std::size_t paths,
                                        std::size_t length) {
  std::vector<double> tail(length, 0.0);
  std::size_t at_least = paths;
  for (std::size_t n = 1; n <= length; ++n) {
    at_least -= n - 1 < hist.size() ? hist[n - 1] : 0;
    tail[n - 1] = static_cast<double>(at_least) / static_cast<double>(paths);
  }
  return tail;
}

}  // namespace

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QVIGAME_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

double value_at(const SolveResult& result, const Grid& grid, std::size_t n,
                std::span<const double> x) {
  return interpolate(grid, result.stack.at(n).values, x);
}

SimReport simulate(const ProblemSpec& spec, const Grid& grid, const SolveResult& result,
                   const PolicyMap& policy, const SimConfig& cfg) {
  check_config(spec, grid, result, policy, cfg);
  const std::size_t start = grid.nearest_slice(cfg.t0);
  const EngineSetup setup{&spec, &grid, &result, &policy, &cfg, start, grid.time_steps()};

  SimReport report;
  report.paths = cfg.paths;
  report.seed = cfg.seed;
  report.substeps = cfg.substeps;
  report.start_slice = start;
  report.t0 = grid.time(start);
  report.x0 = cfg.x0;
  const auto records = run_paths(setup, report.traces);
  std::tie(report.J_mean, report.J_stderr) = mean_and_stderr(records, report.breakdown);

  std::size_t max_I = 0;
  std::size_t max_II = 0;
  for (const auto& r : records) {
    max_I = std::max<std::size_t>(max_I, r.impulses_I);
    max_II = std::max<std::size_t>(max_II, r.impulses_II);
    report.escapes += r.escapes;
  }
  report.histogram_I.assign(max_I + 1, 0);
  report.histogram_II.assign(max_II + 1, 0);
  for (const auto& r : records) {
    ++report.histogram_I[r.impulses_I];
    ++report.histogram_II[r.impulses_II];
  }
  const std::size_t length = std::max(max_I, max_II);
  report.tail_I = tail_from_histogram(report.histogram_I, cfg.paths, length);
  report.tail_II = tail_from_histogram(report.histogram_II, cfg.paths, length);
  report.tail_total.resize(length);
  for (std::size_t n = 0; n < length; ++n) {
    report.tail_total[n] = report.tail_I[n] + report.tail_II[n];
  }
  return report;
}

TailCheck check_impulse_tail(const SimReport& report) {
  if (report.paths < 10000) {
    throw std::invalid_argument("check_impulse_tail needs at least 10^4 paths");
  }
  TailCheck out;
  const auto& tail = report.tail_total;
  for (std::size_t k = 0; k < tail.size(); ++k) {
    out.C = std::max(out.C, static_cast<double>(k + 1) * tail[k]);
    if (k > 0 && tail[k] > tail[k - 1]) out.nonincreasing = false;
  }
  out.margins.resize(tail.size());
  for (std::size_t k = 0; k < tail.size(); ++k) {
    out.margins[k] = out.C / static_cast<double>(k + 1) - tail[k];
  }
  return out;
}

DppReport check_dpp(const ProblemSpec& spec, const Grid& grid, const SolveResult& result,
                    const PolicyMap& policy, const SimConfig& cfg, double s) {
  check_config(spec, grid, result, policy, cfg);
  const std::size_t start = grid.nearest_slice(cfg.t0);
  const std::size_t stop = grid.nearest_slice(s);
  if (std::abs(grid.time(stop) - s) > 1e-9 * grid.horizon()) {
    throw SimulationError("check_dpp: s must be a grid slice time");
  }
  if (stop <= start) throw SimulationError("check_dpp: s must lie after t0");

  SimConfig quiet = cfg;
  quiet.trace_paths = 0;
  const EngineSetup setup{&spec, &grid, &result, &policy, &quiet, start, stop};
  std::vector<TraceRow> unused;
  const auto records = run_paths(setup, unused);
  CostBreakdown means;
  DppReport out;
  std::tie(out.mean, out.standard_error) = mean_and_stderr(records, means);
  out.slice = stop;
  out.s = grid.time(stop);
  out.value_start = value_at(result, grid, start, cfg.x0);
  out.residual = out.mean - out.value_start;
  return out;
}

}  // namespace qvigame
