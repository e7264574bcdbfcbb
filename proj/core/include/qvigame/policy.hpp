#pragma once

// Markov feedback strategies read off a solved value stack.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qvigame/grid.hpp"
#include "qvigame/problem.hpp"
#include "qvigame/solver.hpp"

namespace qvigame {

enum class Regime : std::uint8_t { Continue = 0, ImpulseI = 1, ImpulseII = 2 };

[[nodiscard]] const char* regime_name(Regime r);

class PolicyMap {
 public:
  PolicyMap() = default;
  PolicyMap(std::size_t slices, std::size_t nodes)
      : slices_(slices), nodes_(nodes), regimes_(slices * nodes, Regime::Continue),
        actions_(slices * nodes, -1) {}

  [[nodiscard]] std::size_t slices() const { return slices_; }
  [[nodiscard]] std::size_t nodes() const { return nodes_; }
  [[nodiscard]] Regime regime(std::size_t n, std::size_t p) const {
    return regimes_[n * nodes_ + p];
  }
  /// Index into the acting player's action list; -1 for Continue.
  [[nodiscard]] int action(std::size_t n, std::size_t p) const {
    return actions_[n * nodes_ + p];
  }
  void set(std::size_t n, std::size_t p, Regime r, int action) {
    regimes_[n * nodes_ + p] = r;
    actions_[n * nodes_ + p] = action;
  }

 private:
  std::size_t slices_ = 0;
  std::size_t nodes_ = 0;
  std::vector<Regime> regimes_;
  std::vector<std::int32_t> actions_;
};

/// Regime assignment with the priority player's region taking precedence.
/// Under player II priority: ImpulseII exactly where H_inf V - V <= act_tol;
/// ImpulseI where V - H_sup V <= act_tol, II is idle and the continuation
/// value does not already attain V. Mirrored under player I priority.
[[nodiscard]] PolicyMap extract_policy(const SolveResult& result, const ProblemSpec& spec,
                                       const Grid& grid, double act_tol);

struct RegionMasks {
  std::vector<std::vector<int>> masks;            // per slice: 0, 1 or 2 per node
  std::vector<std::array<std::size_t, 3>> counts;  // per slice: Continue, I, II
};

[[nodiscard]] RegionMasks region_masks(const PolicyMap& policy);

/// Inverse of region_masks on the regime labels. Throws std::invalid_argument
/// on codes outside {0, 1, 2}.
[[nodiscard]] std::vector<std::vector<Regime>> regimes_from_masks(const RegionMasks& masks);

}  // namespace qvigame
