#include "qvigame/policy.hpp"

#include <stdexcept>

namespace qvigame {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Continue:
      return "continue";
    case Regime::ImpulseI:
      return "impulse_I";
    case Regime::ImpulseII:
      return "impulse_II";
  }
  return "?";
}

PolicyMap extract_policy(const SolveResult& result, const ProblemSpec& spec, const Grid& grid,
                         double act_tol) {
  const std::size_t N = grid.time_steps();
  const std::size_t n_nodes = grid.node_count();
  if (result.stack.size() != N + 1) {
    throw std::invalid_argument("extract_policy: stack does not match the grid");
  }
  const QviScheme scheme(spec, grid);
  const auto& sup = scheme.sup_operator();
  const auto& inf = scheme.inf_operator();
  const bool ii_first = spec.priority == Priority::PlayerII;

  PolicyMap policy(N + 1, n_nodes);
  std::vector<double> hs(n_nodes);
  std::vector<double> hi(n_nodes);
  std::vector<double> v_cont(n_nodes);
  for (std::size_t n = 0; n <= N; ++n) {
    const auto& v = result.stack[n].values;
    const double t = grid.time(n);
    const auto cI = sup.costs(t);
    const auto cII = inf.costs(t);
    sup.apply(v, cI, hs);
    inf.apply(v, cII, hi);
    const bool has_cont = n < N;
    if (has_cont) scheme.continuation(result.stack[n + 1].values, n, v_cont);

    for (std::size_t p = 0; p < n_nodes; ++p) {
      const bool ii_binds = hi[p] - v[p] <= act_tol;
      const bool i_binds = v[p] - hs[p] <= act_tol;
      // Impulses only when strictly better than continuing.
      const bool cont_attains_low = has_cont && v_cont[p] >= v[p] - act_tol;
      const bool cont_attains_high = has_cont && v_cont[p] <= v[p] + act_tol;
      Regime r = Regime::Continue;
      if (ii_first) {
        if (ii_binds) {
          r = Regime::ImpulseII;
        } else if (i_binds && !cont_attains_low) {
          r = Regime::ImpulseI;
        }
      } else {
        if (i_binds) {
          r = Regime::ImpulseI;
        } else if (ii_binds && !cont_attains_high) {
          r = Regime::ImpulseII;
        }
      }
      int action = -1;
      if (r == Regime::ImpulseI) action = sup.best(p, v, cI, act_tol).action;
      if (r == Regime::ImpulseII) action = inf.best(p, v, cII, act_tol).action;
      policy.set(n, p, r, action);
    }
  }
  return policy;
}

RegionMasks region_masks(const PolicyMap& policy) {
  RegionMasks out;
  out.masks.resize(policy.slices());
  out.counts.resize(policy.slices(), {0, 0, 0});
  for (std::size_t n = 0; n < policy.slices(); ++n) {
    auto& mask = out.masks[n];
    mask.resize(policy.nodes());
    for (std::size_t p = 0; p < policy.nodes(); ++p) {
      const int code = static_cast<int>(policy.regime(n, p));
      mask[p] = code;
      ++out.counts[n][static_cast<std::size_t>(code)];
    }
  }
  return out;
}

std::vector<std::vector<Regime>> regimes_from_masks(const RegionMasks& masks) {
  std::vector<std::vector<Regime>> out(masks.masks.size());
  for (std::size_t n = 0; n < masks.masks.size(); ++n) {
    out[n].reserve(masks.masks[n].size());
    for (int code : masks.masks[n]) {
      if (code < 0 || code > 2) throw std::invalid_argument("region mask code out of range");
      out[n].push_back(static_cast<Regime>(code));
    }
  }
  return out;
}

}  // namespace qvigame
