#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qvigame/problem.hpp"

namespace qvigame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Deterministic tensor lattice over the validation box.
class Lattice {
 public:
  Lattice(const ProblemSpec& spec, const ValidationSettings& s)
      : dim_(spec.dim), points_(std::max<std::size_t>(s.state_points, 2)) {
    lower_ = s.lower.empty() ? Vector(dim_, -1.0) : s.lower;
    upper_ = s.upper.empty() ? Vector(dim_, 1.0) : s.upper;
    if (lower_.size() != dim_ || upper_.size() != dim_) {
      throw SpecError("validation bounds must have dim entries");
    }
    count_ = 1;
    for (std::size_t i = 0; i < dim_; ++i) count_ *= points_;
  }

  [[nodiscard]] std::size_t size() const { return count_; }
  [[nodiscard]] std::size_t points() const { return points_; }

  [[nodiscard]] double step(std::size_t i) const {
    return (upper_[i] - lower_[i]) / static_cast<double>(points_ - 1);
  }

  void point(std::size_t flat, Vector& out) const {
    out.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      const std::size_t j = flat % points_;
      flat /= points_;
      out[i] = lower_[i] + static_cast<double>(j) * step(i);
    }
  }

  /// Index along dimension i of a flat lattice index.
  [[nodiscard]] std::size_t index(std::size_t flat, std::size_t i) const {
    for (std::size_t k = 0; k < i; ++k) flat /= points_;
    return flat % points_;
  }

 private:
  std::size_t dim_;
  std::size_t points_;
  Vector lower_;
  Vector upper_;
  std::size_t count_ = 1;
};

std::vector<double> sample_times(double horizon, std::size_t n) {
  std::vector<double> ts;
  if (n <= 1) return {0.0};
  for (std::size_t k = 0; k < n; ++k) {
    ts.push_back(horizon * static_cast<double>(k) / static_cast<double>(n - 1));
  }
  return ts;
}

Vector add(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

/// Tracks the minimum slack seen and where it happened.
struct WorstCase {
  double margin = kInf;
  std::optional<Witness> witness;

  void offer(double m, double t, const Vector& x, std::vector<Vector> actions) {
    if (m < margin) {
      margin = m;
      witness = Witness{t, x, std::move(actions)};
    }
  }
};

CheckResult finish(const char* name, const WorstCase& w, bool passed, std::string detail) {
  CheckResult r;
  r.name = name;
  r.passed = passed;
  r.margin = w.margin;
  r.witness = w.witness;
  r.detail = std::move(detail);
  return r;
}

CheckResult check_lipschitz(const ProblemSpec& spec, const ValidationSettings& s,
                            const Lattice& lat, const std::vector<double>& times) {
  WorstCase worst;  // margin = cap - ratio
  double max_lip = 0.0;
  double max_growth = 0.0;
  Vector x;
  Vector y;
  for (double t : times) {
    for (std::size_t p = 0; p < lat.size(); ++p) {
      lat.point(p, x);
      const auto cx = evaluate_coefficients(spec, t, x);
      const double growth =
          (euclidean_norm(cx.diffusion) + euclidean_norm(cx.drift)) / (1.0 + euclidean_norm(x));
      max_growth = std::max(max_growth, growth);
      worst.offer(s.lipschitz_cap - growth, t, x, {});
      for (std::size_t i = 0; i < spec.dim; ++i) {
        if (lat.index(p, i) + 1 >= lat.points()) continue;
        y = x;
        y[i] += lat.step(i);
        const auto cy = evaluate_coefficients(spec, t, y);
        Vector ds(cx.diffusion.size());
        Vector db(cx.drift.size());
        for (std::size_t k = 0; k < ds.size(); ++k) ds[k] = cx.diffusion[k] - cy.diffusion[k];
        for (std::size_t k = 0; k < db.size(); ++k) db[k] = cx.drift[k] - cy.drift[k];
        const double ratio = (euclidean_norm(ds) + euclidean_norm(db)) / lat.step(i);
        max_lip = std::max(max_lip, ratio);
        worst.offer(s.lipschitz_cap - ratio, t, x, {});
      }
    }
  }
  const bool ok = std::isfinite(max_lip) && std::isfinite(max_growth) &&
                  max_lip <= s.lipschitz_cap && max_growth <= s.lipschitz_cap;
  std::ostringstream d;
  d << "max Lipschitz ratio " << max_lip << ", max growth ratio " << max_growth << ", cap "
    << s.lipschitz_cap;
  return finish(checks::kLipschitz, worst, ok, d.str());
}

CheckResult check_bounded(const ProblemSpec& spec, const ValidationSettings& s,
                          const Lattice& lat, const std::vector<double>& times) {
  WorstCase worst;
  double sup_f = 0.0;
  double sup_g = 0.0;
  bool finite = true;
  Vector x;
  for (std::size_t p = 0; p < lat.size(); ++p) {
    lat.point(p, x);
    for (double t : times) {
      const double f = spec.running(t, x);
      finite = finite && std::isfinite(f);
      sup_f = std::max(sup_f, std::abs(f));
      worst.offer(s.bound_cap - std::abs(f), t, x, {});
    }
    const double g = spec.terminal(x);
    finite = finite && std::isfinite(g);
    sup_g = std::max(sup_g, std::abs(g));
    worst.offer(s.bound_cap - std::abs(g), spec.horizon, x, {});
  }
  std::ostringstream d;
  d << "sup|f| " << sup_f << ", sup|g| " << sup_g;
  return finish(checks::kBounded, worst,
                finite && sup_f <= s.bound_cap && sup_g <= s.bound_cap, d.str());
}

CheckResult check_cost_floor(const ProblemSpec& spec, const ValidationSettings& s,
                             const std::vector<double>& times) {
  WorstCase worst;
  for (Player who : {Player::I, Player::II}) {
    const auto& cost = spec.cost(who);
    const Vector origin(spec.dim, 0.0);
    for (double t : times) {
      for (const auto& a : spec.actions(who).actions) {
        worst.offer(cost(t, a) - s.cost_floor, t, {}, {a});
      }
      // Infimum over the whole cone: small impulses cost factor(t) * fixed.
      const double inf_cone = cost.proportional < 0.0
                                  ? -std::numeric_limits<double>::infinity()
                                  : cost.factor(t) * cost.fixed;
      worst.offer(inf_cone - s.cost_floor, t, {}, {origin});
    }
  }
  std::ostringstream d;
  d << "inf cost minus k = " << worst.margin << " (k = " << s.cost_floor << ")";
  return finish(checks::kCostFloor, worst, worst.margin >= 0.0, d.str());
}

CheckResult check_subadditive(const ProblemSpec& spec, const std::vector<double>& times) {
  WorstCase worst;
  for (Player who : {Player::I, Player::II}) {
    const auto& set = spec.actions(who);
    const auto& cost = spec.cost(who);
    for (double t : times) {
      for (const auto& a1 : set.actions) {
        for (const auto& a2 : set.actions) {
          const Vector sum = add(a1, a2);
          if (!set.cone.contains(sum)) continue;
          worst.offer(cost(t, a1) + cost(t, a2) - cost(t, sum), t, {}, {a1, a2});
        }
      }
    }
  }
  return finish(checks::kSubadditive, worst, worst.margin >= 0.0,
                "min of c(a1)+c(a2)-c(a1+a2) over both players");
}

CheckResult check_no_terminal_impulse(const ProblemSpec& spec, const Lattice& lat) {
  WorstCase worst;
  const double T = spec.horizon;
  Vector x;
  for (std::size_t p = 0; p < lat.size(); ++p) {
    lat.point(p, x);
    const double gx = spec.terminal(x);
    for (const auto& xi : spec.actions_I.actions) {
      const double jump = spec.terminal(add(x, xi)) - spec.cost_I(T, xi);
      worst.offer(gx - jump, T, x, {xi});
    }
    for (const auto& eta : spec.actions_II.actions) {
      const double jump = spec.terminal(add(x, eta)) + spec.cost_II(T, eta);
      worst.offer(jump - gx, T, x, {eta});
    }
  }
  return finish(checks::kNoTerminalImpulse, worst, worst.margin >= 0.0,
                "sup[g(x+xi)-c(T,xi)] <= g(x) <= inf[g(x+eta)+chi(T,eta)]");
}

CheckResult check_strict_subadditive(const ProblemSpec& spec, const ValidationSettings& s,
                                     const std::vector<double>& times) {
  WorstCase worst;
  const double h = s.strict_margin;
  const auto& U = spec.actions_I;
  const auto& V = spec.actions_II;
  for (double t : times) {
    for (const auto& e1 : V.actions) {
      for (const auto& e2 : V.actions) {
        const Vector sum = add(e1, e2);
        if (!V.cone.contains(sum)) continue;
        worst.offer(spec.cost_II(t, e1) + spec.cost_II(t, e2) - h - spec.cost_II(t, sum), t, {},
                    {e1, e2});
      }
    }
    for (const auto& x1 : U.actions) {
      for (const auto& eta : V.actions) {
        for (const auto& x2 : U.actions) {
          const Vector combo = add(add(x1, eta), x2);
          if (!U.cone.contains(combo)) continue;
          const double slack = spec.cost_I(t, x1) - spec.cost_II(t, eta) + spec.cost_I(t, x2) -
                               h - spec.cost_I(t, combo);
          worst.offer(slack, t, {}, {x1, eta, x2});
        }
      }
    }
  }
  std::ostringstream d;
  d << "strict subadditivity with h = " << h;
  return finish(checks::kStrictSubadditive, worst, worst.margin >= 0.0, d.str());
}

}  // namespace

ValidationReport validate_assumptions(const ProblemSpec& spec, const ValidationSettings& settings) {
  spec.check_well_formed();
  const Lattice lattice(spec, settings);
  const auto times = sample_times(spec.horizon, settings.time_points);

  ValidationReport report;
  report.checks.push_back(check_lipschitz(spec, settings, lattice, times));
  report.checks.push_back(check_bounded(spec, settings, lattice, times));
  report.checks.push_back(check_cost_floor(spec, settings, times));
  report.checks.push_back(check_subadditive(spec, times));
  report.checks.push_back(check_no_terminal_impulse(spec, lattice));
  report.checks.push_back(check_strict_subadditive(spec, settings, times));
  report.overall = std::all_of(report.checks.begin(), report.checks.end(),
                               [](const CheckResult& c) { return c.passed; });
  return report;
}

}  // namespace qvigame
