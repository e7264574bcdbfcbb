#pragma once

// Truncated tensor-product space grid plus uniform time stepping.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qvigame/problem.hpp"

namespace qvigame {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Boundary { NeumannZeroSecond, DirichletFrozen };

struct GridRequest {
  Vector lower;
  Vector upper;
  std::vector<std::size_t> nodes;  // per dimension, >= 3
  std::size_t time_steps = 0;      // 0: smallest count satisfying cfl_safety * dt_max
  double cfl_safety = 0.95;
  Boundary boundary = Boundary::NeumannZeroSecond;
};

class Grid {
 public:
  Grid(Vector lower, Vector upper, std::vector<std::size_t> nodes, double horizon,
       std::size_t time_steps, Boundary boundary);

  [[nodiscard]] std::size_t dim() const { return lower_.size(); }
  [[nodiscard]] std::size_t node_count() const { return node_count_; }
  [[nodiscard]] std::size_t nodes(std::size_t i) const { return nodes_[i]; }
  [[nodiscard]] std::size_t stride(std::size_t i) const { return strides_[i]; }
  [[nodiscard]] double lower(std::size_t i) const { return lower_[i]; }
  [[nodiscard]] double upper(std::size_t i) const { return upper_[i]; }
  [[nodiscard]] double spacing(std::size_t i) const { return spacing_[i]; }
  [[nodiscard]] const Vector& lower() const { return lower_; }
  [[nodiscard]] const Vector& upper() const { return upper_; }

  [[nodiscard]] std::size_t time_steps() const { return time_steps_; }
  [[nodiscard]] double horizon() const { return horizon_; }
  [[nodiscard]] double dt() const { return horizon_ / static_cast<double>(time_steps_); }
  /// Slice time t_n; t_{N} is exactly the horizon.
  [[nodiscard]] double time(std::size_t n) const;
  [[nodiscard]] Boundary boundary() const { return boundary_; }

  /// x_min + j * dx, computed from the index.
  [[nodiscard]] double coordinate(std::size_t i, std::size_t j) const {
    return lower_[i] + static_cast<double>(j) * spacing_[i];
  }
  [[nodiscard]] std::size_t index(std::size_t flat, std::size_t i) const {
    return (flat / strides_[i]) % nodes_[i];
  }
  void point(std::size_t flat, Vector& out) const;
  [[nodiscard]] Vector point(std::size_t flat) const {
    Vector v;
    point(flat, v);
    return v;
  }
  [[nodiscard]] bool on_boundary(std::size_t flat) const;
  [[nodiscard]] bool contains(std::span<const double> x) const;
  /// Flat index of the node nearest to x (clamped into the box).
  [[nodiscard]] std::size_t nearest_node(std::span<const double> x) const;
  /// Closest slice index to time t.
  [[nodiscard]] std::size_t nearest_slice(double t) const;

  // Construction diagnostics about how actions fit in the box.
  [[nodiscard]] double max_action_norm() const { return max_action_norm_; }
  [[nodiscard]] double domain_margin() const { return domain_margin_; }
  [[nodiscard]] std::size_t off_domain_pairs() const { return off_domain_pairs_; }

 private:
  friend Grid build_grid(const ProblemSpec&, const GridRequest&);

  Vector lower_;
  Vector upper_;
  Vector spacing_;
  std::vector<std::size_t> nodes_;
  std::vector<std::size_t> strides_;
  std::size_t node_count_ = 1;
  double horizon_ = 1.0;
  std::size_t time_steps_ = 1;
  Boundary boundary_ = Boundary::NeumannZeroSecond;
  double max_action_norm_ = 0.0;
  double domain_margin_ = 0.0;
  std::size_t off_domain_pairs_ = 0;
};

struct CflReport {
  bool ok = false;
  double dt_max = 0.0;
};

/// Monotonicity ceiling of the explicit upwind scheme:
/// dt_max = 1 / sum_i [ max (sigma sigma^T)_ii / dx_i^2 + max |b_i| / dx_i ],
/// maxima over grid nodes and sampled times.
[[nodiscard]] CflReport check_cfl(const ProblemSpec& spec, const Grid& grid);

/// Builds the grid; throws GridError when dt exceeds the CFL bound.
[[nodiscard]] Grid build_grid(const ProblemSpec& spec, const GridRequest& request);

}  // namespace qvigame
