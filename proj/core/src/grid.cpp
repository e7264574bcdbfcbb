#include "qvigame/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qvigame {

Grid::Grid(Vector lower, Vector upper, std::vector<std::size_t> nodes, double horizon,
           std::size_t time_steps, Boundary boundary)
    : lower_(std::move(lower)),
      upper_(std::move(upper)),
      nodes_(std::move(nodes)),
      horizon_(horizon),
      time_steps_(time_steps),
      boundary_(boundary) {
  const std::size_t d = lower_.size();
  if (d == 0 || upper_.size() != d || nodes_.size() != d) {
    throw GridError("grid bounds and node counts must have one entry per dimension");
  }
  if (!(horizon_ > 0.0) || time_steps_ == 0) {
    throw GridError("grid needs a positive horizon and at least one time step");
  }
  spacing_.resize(d);
  strides_.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(upper_[i] > lower_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
      throw GridError("degenerate bounds in dimension " + std::to_string(i));
    }
    if (nodes_[i] < 3) {
      throw GridError("at least 3 nodes per dimension are required");
    }
    spacing_[i] = (upper_[i] - lower_[i]) / static_cast<double>(nodes_[i] - 1);
    strides_[i] = node_count_;
    node_count_ *= nodes_[i];
  }
}

double Grid::time(std::size_t n) const {
  if (n >= time_steps_) return horizon_;
  return horizon_ * static_cast<double>(n) / static_cast<double>(time_steps_);
}

void Grid::point(std::size_t flat, Vector& out) const {
  out.resize(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = coordinate(i, index(flat, i));
}

bool Grid::on_boundary(std::size_t flat) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    const std::size_t j = index(flat, i);
    if (j == 0 || j + 1 == nodes_[i]) return true;
  }
  return false;
}

bool Grid::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < dim(); ++i) {
    const double tol = 1e-9 * spacing_[i];
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  }
  return true;
}

std::size_t Grid::nearest_node(std::span<const double> x) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double s = std::round((x[i] - lower_[i]) / spacing_[i]);
    const double clamped = std::clamp(s, 0.0, static_cast<double>(nodes_[i] - 1));
    flat += static_cast<std::size_t>(clamped) * strides_[i];
  }
  return flat;
}

std::size_t Grid::nearest_slice(double t) const {
  const double s = std::round(t / dt());
  return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(time_steps_)));
}

CflReport check_cfl(const ProblemSpec& spec, const Grid& grid) {
  const std::size_t d = grid.dim();
  Vector max_a(d, 0.0);
  Vector max_b(d, 0.0);
  constexpr std::size_t kTimeSamples = 5;
  Vector x;
  for (std::size_t k = 0; k < kTimeSamples; ++k) {
    const double t = spec.horizon * static_cast<double>(k) / (kTimeSamples - 1);
    for (std::size_t p = 0; p < grid.node_count(); ++p) {
      grid.point(p, x);
      for (std::size_t i = 0; i < d; ++i) {
        const double s = spec.diffusion_diagonal(i, t, x);
        max_a[i] = std::max(max_a[i], s * s);
        max_b[i] = std::max(max_b[i], std::abs(spec.drift_component(i, t, x)));
      }
    }
  }
  double rate = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double dx = grid.spacing(i);
    rate += max_a[i] / (dx * dx) + max_b[i] / dx;
  }
  CflReport r;
  r.dt_max = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
  r.ok = grid.dt() <= r.dt_max;
  return r;
}

Grid build_grid(const ProblemSpec& spec, const GridRequest& request) {
  spec.check_well_formed(true);
  if (request.lower.size() != spec.dim || request.upper.size() != spec.dim ||
      request.nodes.size() != spec.dim) {
    throw GridError("grid request must have one entry per state dimension");
  }
  Grid grid(request.lower, request.upper, request.nodes, spec.horizon,
            request.time_steps == 0 ? 1 : request.time_steps, request.boundary);

  if (request.time_steps == 0) {
    if (!(request.cfl_safety > 0.0 && request.cfl_safety <= 1.0)) {
      throw GridError("cfl_safety must lie in (0, 1]");
    }
    const double dt_max = check_cfl(spec, grid).dt_max;
    std::size_t steps = 1;
    if (std::isfinite(dt_max)) {
      steps = static_cast<std::size_t>(std::ceil(spec.horizon / (request.cfl_safety * dt_max)));
      steps = std::max<std::size_t>(steps, 1);
    }
    grid.time_steps_ = steps;
  }

  const auto cfl = check_cfl(spec, grid);
  if (!cfl.ok) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "time step " << grid.dt() << " violates the CFL bound dt_max = " << cfl.dt_max;
    throw GridError(msg.str());
  }

  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    margin = std::min(margin, 0.5 * (grid.upper(i) - grid.lower(i)));
  }
  grid.domain_margin_ = margin;
  Vector x;
  for (Player who : {Player::I, Player::II}) {
    for (const auto& a : spec.actions(who).actions) {
      grid.max_action_norm_ = std::max(grid.max_action_norm_, euclidean_norm(a));
      for (std::size_t p = 0; p < grid.node_count(); ++p) {
        if (grid.on_boundary(p)) continue;
        grid.point(p, x);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += a[i];
        if (!grid.contains(x)) ++grid.off_domain_pairs_;
      }
    }
  }
  return grid;
}

}  // namespace qvigame
