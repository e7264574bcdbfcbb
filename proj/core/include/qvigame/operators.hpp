#pragma once

// Discrete intervention operators H^c_sup / H^chi_inf and the local
// generator L = <b, grad V> + 1/2 tr(sigma sigma^T D^2 V) on a grid slice.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qvigame/grid.hpp"
#include "qvigame/problem.hpp"

namespace qvigame {

/// Value function samples on one time slice.
struct ValueField {
  double t = 0.0;
  std::vector<double> values;
};

/// Multilinear interpolation of node values at x. Coordinates outside the
/// box are clamped to it.
[[nodiscard]] double interpolate(const Grid& grid, std::span<const double> values,
                                 std::span<const double> x);

/// Precomputed interpolation weights for every (node, action) target.
class InterventionStencil {
 public:
  struct Entry {
    std::uint32_t node;
    double weight;
  };

  InterventionStencil(const Grid& grid, const std::vector<Vector>& actions);

  [[nodiscard]] std::size_t action_count() const { return actions_; }
  [[nodiscard]] std::span<const Entry> entries(std::size_t node, std::size_t action) const {
    const std::size_t k = node * actions_ + action;
    return {entries_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  [[nodiscard]] bool clamped(std::size_t node, std::size_t action) const {
    return clamped_[node * actions_ + action] != 0;
  }
  [[nodiscard]] double target_value(std::size_t node, std::size_t action,
                                    std::span<const double> values) const {
    double v = 0.0;
    for (const auto& e : entries(node, action)) v += e.weight * values[e.node];
    return v;
  }
  [[nodiscard]] std::size_t clamped_pairs() const;

 private:
  std::size_t actions_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
  std::vector<std::uint8_t> clamped_;
};

/// H^c_sup (player I) or H^chi_inf (player II) bound to a grid.
class InterventionOperator {
 public:
  struct Choice {
    double value;
    int action;  // -1 when the player has no actions
    bool clamped;
  };

  InterventionOperator(const ProblemSpec& spec, const Grid& grid, Player who);

  [[nodiscard]] Player player() const { return who_; }
  [[nodiscard]] const InterventionStencil& stencil() const { return stencil_; }
  [[nodiscard]] const std::vector<Vector>& actions() const { return actions_; }

  /// Per-action costs at time t, multiplied by `cost_scale`.
  [[nodiscard]] std::vector<double> costs(double t, double cost_scale = 1.0) const;

  /// out[x] = opt_a [ V(x + a) -/+ cost_a ]. Without actions the result is
  /// -inf (player I) or +inf (player II).
  void apply(std::span<const double> values, std::span<const double> costs,
             std::span<double> out) const;

  /// Optimum at one node. Candidates within `tie_tol` of the optimum are
  /// resolved to the smallest-magnitude action, then lexicographically.
  [[nodiscard]] Choice best(std::size_t node, std::span<const double> values,
                            std::span<const double> costs, double tie_tol) const;

 private:
  Player who_;
  std::vector<Vector> actions_;
  InterventionStencil stencil_;
  const AffineCost* cost_;
  std::vector<std::size_t> tie_order_;
};

/// Upwind / central finite-difference discretization of L.
class LocalOperator {
 public:
  LocalOperator(const ProblemSpec& spec, const Grid& grid);

  void apply(std::span<const double> values, double t, std::span<double> out) const;

 private:
  const ProblemSpec* spec_;
  const Grid* grid_;
  std::vector<double> coords_;  // node-major coordinates
};

[[nodiscard]] ValueField intervention_sup(const ValueField& slice, const ProblemSpec& spec,
                                          const Grid& grid);
[[nodiscard]] ValueField intervention_inf(const ValueField& slice, const ProblemSpec& spec,
                                          const Grid& grid);
[[nodiscard]] ValueField apply_local_operator(const ValueField& slice, const ProblemSpec& spec,
                                              const Grid& grid);

}  // namespace qvigame
