#include "qvigame/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qvigame {

namespace {

constexpr double kSnap = 1e-9;

struct AxisWeight {
  std::size_t lo;
  double frac;  // weight of lo + 1
  bool clamped;
};

/// Bracketing node and fractional offset of coordinate y along axis i.
AxisWeight locate(const Grid& grid, std::size_t i, double y) {
  const double dx = grid.spacing(i);
  const double last = static_cast<double>(grid.nodes(i) - 1);
  double s = (y - grid.lower(i)) / dx;
  bool clamped = false;
  if (s < -kSnap || s > last + kSnap) clamped = true;
  s = std::clamp(s, 0.0, last);
  double base = std::floor(s);
  double frac = s - base;
  if (frac < kSnap) {
    frac = 0.0;
  } else if (frac > 1.0 - kSnap) {
    base += 1.0;
    frac = 0.0;
  }
  if (base >= last) {
    base = last;
    frac = 0.0;
  }
  return {static_cast<std::size_t>(base), frac, clamped};
}

template <typename Visit>
bool for_each_corner(const Grid& grid, std::span<const double> y, Visit&& visit) {
  const std::size_t d = grid.dim();
  AxisWeight axes[8];
  std::vector<AxisWeight> heap;
  AxisWeight* ax = axes;
  if (d > 8) {
    heap.resize(d);
    ax = heap.data();
  }
  bool clamped = false;
  for (std::size_t i = 0; i < d; ++i) {
    ax[i] = locate(grid, i, y[i]);
    clamped = clamped || ax[i].clamped;
  }
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const bool up = (mask >> i) & 1U;
      w *= up ? ax[i].frac : 1.0 - ax[i].frac;
      flat += (ax[i].lo + (up ? 1 : 0)) * grid.stride(i);
    }
    if (w != 0.0) visit(flat, w);
  }
  return clamped;
}

bool lexicographically_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void require_finite(const ValueField& slice, const char* who) {
  for (double v : slice.values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite slice value");
  }
}

}  // namespace

double interpolate(const Grid& grid, std::span<const double> values, std::span<const double> x) {
  double v = 0.0;
  for_each_corner(grid, x, [&](std::size_t node, double w) { v += w * values[node]; });
  return v;
}

InterventionStencil::InterventionStencil(const Grid& grid, const std::vector<Vector>& actions)
    : actions_(actions.size()) {
  const std::size_t n = grid.node_count();
  offsets_.reserve(n * actions_ + 1);
  offsets_.push_back(0);
  clamped_.reserve(n * actions_);
  Vector x;
  Vector y(grid.dim());
  for (std::size_t p = 0; p < n; ++p) {
    grid.point(p, x);
    for (const auto& a : actions) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + a[i];
      const bool clamped = for_each_corner(grid, y, [&](std::size_t node, double w) {
        entries_.push_back({static_cast<std::uint32_t>(node), w});
      });
      clamped_.push_back(clamped ? 1 : 0);
      offsets_.push_back(entries_.size());
    }
  }
}

std::size_t InterventionStencil::clamped_pairs() const {
  return static_cast<std::size_t>(std::count(clamped_.begin(), clamped_.end(), 1));
}

InterventionOperator::InterventionOperator(const ProblemSpec& spec, const Grid& grid, Player who)
    : who_(who),
      actions_(spec.actions(who).actions),
      stencil_(grid, actions_),
      cost_(&spec.cost(who)) {
  tie_order_.resize(actions_.size());
  std::iota(tie_order_.begin(), tie_order_.end(), 0);
  std::stable_sort(tie_order_.begin(), tie_order_.end(), [&](std::size_t a, std::size_t b) {
    const double na = euclidean_norm(actions_[a]);
    const double nb = euclidean_norm(actions_[b]);
    if (na != nb) return na < nb;
    return lexicographically_less(actions_[a], actions_[b]);
  });
}

std::vector<double> InterventionOperator::costs(double t, double cost_scale) const {
  std::vector<double> c(actions_.size());
  for (std::size_t a = 0; a < actions_.size(); ++a) c[a] = cost_scale * (*cost_)(t, actions_[a]);
  return c;
}

void InterventionOperator::apply(std::span<const double> values, std::span<const double> costs,
                                 std::span<double> out) const {
  const std::size_t n = values.size();
  const std::size_t na = actions_.size();
  if (who_ == Player::I) {
    for (std::size_t p = 0; p < n; ++p) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        best = std::max(best, stencil_.target_value(p, a, values) - costs[a]);
      }
      out[p] = best;
    }
  } else {
    for (std::size_t p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        best = std::min(best, stencil_.target_value(p, a, values) + costs[a]);
      }
      out[p] = best;
    }
  }
}

InterventionOperator::Choice InterventionOperator::best(std::size_t node,
                                                        std::span<const double> values,
                                                        std::span<const double> costs,
                                                        double tie_tol) const {
  const bool maximize = who_ == Player::I;
  Choice choice{maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity(),
                -1, false};
  if (actions_.empty()) return choice;
  std::vector<double> candidate(actions_.size());
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    const double v = stencil_.target_value(node, a, values);
    candidate[a] = maximize ? v - costs[a] : v + costs[a];
    choice.value = maximize ? std::max(choice.value, candidate[a])
                            : std::min(choice.value, candidate[a]);
  }
  for (std::size_t a : tie_order_) {
    if (std::abs(candidate[a] - choice.value) <= tie_tol) {
      choice.action = static_cast<int>(a);
      choice.clamped = stencil_.clamped(node, a);
      break;
    }
  }
  return choice;
}

LocalOperator::LocalOperator(const ProblemSpec& spec, const Grid& grid)
    : spec_(&spec), grid_(&grid) {
  coords_.resize(grid.node_count() * grid.dim());
  Vector x;
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    grid.point(p, x);
    std::copy(x.begin(), x.end(), coords_.begin() + static_cast<std::ptrdiff_t>(p * grid.dim()));
  }
}

void LocalOperator::apply(std::span<const double> v, double t, std::span<double> out) const {
  const Grid& g = *grid_;
  const std::size_t d = g.dim();
  const bool dirichlet = g.boundary() == Boundary::DirichletFrozen;
  for (std::size_t p = 0; p < g.node_count(); ++p) {
    if (dirichlet && g.on_boundary(p)) {
      out[p] = 0.0;
      continue;
    }
    const std::span<const double> x(coords_.data() + p * d, d);
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t j = g.index(p, i);
      const std::size_t s = g.stride(i);
      const double dx = g.spacing(i);
      const bool has_lo = j > 0;
      const bool has_hi = j + 1 < g.nodes(i);
      const double sig = spec_->diffusion_diagonal(i, t, x);
      const double b = spec_->drift_component(i, t, x);
      if (has_lo && has_hi) {
        acc += 0.5 * sig * sig * (v[p + s] - 2.0 * v[p] + v[p - s]) / (dx * dx);
      }
      if (b > 0.0 && has_hi) {
        acc += b * (v[p + s] - v[p]) / dx;
      } else if (b < 0.0 && has_lo) {
        acc += b * (v[p] - v[p - s]) / dx;
      }
    }
    out[p] = acc;
  }
}

ValueField intervention_sup(const ValueField& slice, const ProblemSpec& spec, const Grid& grid) {
  require_finite(slice, "intervention_sup");
  const InterventionOperator op(spec, grid, Player::I);
  ValueField out{slice.t, std::vector<double>(slice.values.size())};
  op.apply(slice.values, op.costs(slice.t), out.values);
  return out;
}

ValueField intervention_inf(const ValueField& slice, const ProblemSpec& spec, const Grid& grid) {
  require_finite(slice, "intervention_inf");
  const InterventionOperator op(spec, grid, Player::II);
  ValueField out{slice.t, std::vector<double>(slice.values.size())};
  op.apply(slice.values, op.costs(slice.t), out.values);
  return out;
}

ValueField apply_local_operator(const ValueField& slice, const ProblemSpec& spec,
                                const Grid& grid) {
  require_finite(slice, "apply_local_operator");
  const LocalOperator op(spec, grid);
  ValueField out{slice.t, std::vector<double>(slice.values.size())};
  op.apply(slice.values, slice.t, out.values);
  return out;
}

}  // namespace qvigame
