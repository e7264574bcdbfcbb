#pragma once

// Problem instances and independent oracles shared by unit and
// acceptance tests. Nothing here calls the solver or the simulator.

#include <cstdint>
#include <filesystem>
#include <functional>

#include "qvigame/grid.hpp"
#include "qvigame/problem.hpp"

namespace fixtures {

using qvigame::GridRequest;
using qvigame::Priority;
using qvigame::ProblemSpec;
using qvigame::Vector;

/// 1D reference game on [-2, 2]: sigma = 0.5, b = 0, f a bump at 0,
/// g the unit hat, c = 0.3 + 1.2|xi|, chi = 0.15 + 1.1|eta|,
/// U = {0.25, 0.5}, V = {-0.25, -0.5}. Mirrors configs/reference_1d.ini.
ProblemSpec reference_spec(Priority priority = Priority::PlayerII);
GridRequest reference_grid(std::size_t nodes = 401);

/// Reference game with f = 0 and both fixed costs raised to 10.
ProblemSpec heat_spec();
/// g = 1, f = 0, reference costs.
ProblemSpec constant_spec();

/// E[g(x0 + sigma W_T)] by exact sampling of the Gaussian endpoint with
/// std::mt19937_64. Independent of the Philox stream and Euler scheme.
struct McEstimate {
  double mean;
  double stderr_;
};
McEstimate heat_mc_oracle(const std::function<double(double)>& g, double x0, double sigma,
                          double T, std::size_t paths, std::uint64_t seed);

/// Same expectation by composite Simpson quadrature against the normal
/// density on [x0 - 10 s, x0 + 10 s].
double heat_quadrature_oracle(const std::function<double(double)>& g, double x0, double sigma,
                              double T, std::size_t panels = 20000);

/// Unit hat max(0, 1 - |x|).
double unit_hat(double x);

/// Directory for scratch files under the build tree, emptied on creation.
std::filesystem::path scratch_dir(const std::string& name);

/// Repository configs directory.
std::filesystem::path configs_dir();

}  // namespace fixtures
