#include "fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>

#ifndef QVIGAME_SOURCE_DIR
#error "QVIGAME_SOURCE_DIR must be defined"
#endif
#ifndef QVIGAME_SCRATCH_DIR
#error "QVIGAME_SCRATCH_DIR must be defined"
#endif

namespace fixtures {

using namespace qvigame;

namespace {

ProblemSpec base_spec() {
  ProblemSpec s;
  s.dim = 1;
  s.horizon = 1.0;
  s.drift = {{0.0}, {0.0}};
  s.diffusion = {DiffusionFamily::Constant, {0.5}, {0.0}};
  GainTerm hat;
  hat.family = GainFamily::Hat;
  hat.amplitude = 1.0;
  hat.center = {0.0};
  hat.width = 1.0;
  s.terminal_gain.terms = {hat};
  s.cost_I = {0.3, 1.2, Modulation::None, 0.0, 0.0};
  s.cost_II = {0.15, 1.1, Modulation::None, 0.0, 0.0};
  s.actions_I = {{ConeFamily::Orthant, {1.0}}, {{0.25}, {0.5}}};
  s.actions_II = {{ConeFamily::Orthant, {-1.0}}, {{-0.25}, {-0.5}}};
  return s;
}

}  // namespace

ProblemSpec reference_spec(Priority priority) {
  ProblemSpec s = base_spec();
  GainTerm bump;
  bump.family = GainFamily::Bump;
  bump.amplitude = 3.0;
  bump.center = {0.0};
  bump.width = 0.25;
  s.running_gain.terms = {bump};
  s.priority = priority;
  return s;
}

GridRequest reference_grid(std::size_t nodes) {
  GridRequest r;
  r.lower = {-2.0};
  r.upper = {2.0};
  r.nodes = {nodes};
  r.time_steps = 0;
  r.cfl_safety = 0.95;
  return r;
}

ProblemSpec heat_spec() {
  ProblemSpec s = base_spec();
  s.cost_I.fixed = 10.0;
  s.cost_II.fixed = 10.0;
  return s;
}

ProblemSpec constant_spec() {
  ProblemSpec s = base_spec();
  GainTerm one;
  one.family = GainFamily::Constant;
  one.amplitude = 1.0;
  s.terminal_gain.terms = {one};
  return s;
}

McEstimate heat_mc_oracle(const std::function<double(double)>& g, double x0, double sigma,
                          double T, std::size_t paths, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double s = sigma * std::sqrt(T);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    const double v = g(x0 + s * z(rng));
    sum += v;
    sum_sq += v * v;
  }
  const auto n = static_cast<double>(paths);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

double heat_quadrature_oracle(const std::function<double(double)>& g, double x0, double sigma,
                              double T, std::size_t panels) {
  const double s = sigma * std::sqrt(T);
  const double a = x0 - 10.0 * s;
  const double b = x0 + 10.0 * s;
  const std::size_t n = panels * 2;
  const double h = (b - a) / static_cast<double>(n);
  auto integrand = [&](double x) {
    const double u = (x - x0) / s;
    return g(x) * std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * std::numbers::pi));
  };
  double acc = integrand(a) + integrand(b);
  for (std::size_t i = 1; i < n; ++i) {
    acc += integrand(a + static_cast<double>(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

double unit_hat(double x) { return std::max(0.0, 1.0 - std::abs(x)); }

std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(QVIGAME_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path configs_dir() {
  return std::filesystem::path(QVIGAME_SOURCE_DIR) / "configs";
}

}  // namespace fixtures
