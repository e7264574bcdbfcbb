#include "qvigame/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qvigame {

namespace {

double center_component(const Vector& center, std::size_t i) {
  return center.empty() ? 0.0 : center[i];
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require(bool ok, const std::string& what) {
  if (!ok) throw SpecError(what);
}

void check_action_set(const ActionSet& set, std::size_t dim, const char* who,
                      bool allow_empty) {
  const std::string name(who);
  require(allow_empty || !set.actions.empty(), "actions_" + name + " is empty");
  require(set.cone.direction.size() == dim,
          "cone_" + name + " direction must have " + std::to_string(dim) + " components");
  if (set.cone.family == ConeFamily::Ray) {
    require(euclidean_norm(set.cone.direction) > 0.0, "cone_" + name + " ray direction is zero");
  }
  for (std::size_t a = 0; a < set.actions.size(); ++a) {
    const auto& v = set.actions[a];
    const std::string label = "actions_" + name + "[" + std::to_string(a) + "]";
    require(v.size() == dim, label + " has wrong dimension");
    require(all_finite(v), label + " is not finite");
    require(euclidean_norm(v) > 0.0, label + " is the zero action");
    require(set.cone.contains(v), label + " lies outside cone_" + name);
  }
}

void check_cost(const AffineCost& c, double horizon, const char* who) {
  const std::string name(who);
  require(std::isfinite(c.fixed) && std::isfinite(c.proportional),
          "cost_" + name + " coefficients must be finite");
  require(c.proportional >= 0.0, "cost_" + name + " proportional part must be nonnegative");
  switch (c.modulation) {
    case Modulation::None:
      break;
    case Modulation::Linear:
      require(c.factor(0.0) > 0.0 && c.factor(horizon) > 0.0,
              "cost_" + name + " linear modulation must stay positive on [0, T]");
      break;
    case Modulation::Sine:
      require(std::abs(c.modulation_amplitude) < 1.0,
              "cost_" + name + " sine modulation amplitude must be below 1");
      break;
  }
}

void check_payoff(const Payoff& p, std::size_t dim, const char* who) {
  for (const auto& term : p.terms) {
    require(std::isfinite(term.amplitude), std::string(who) + " amplitude is not finite");
    require(term.center.empty() || term.center.size() == dim,
            std::string(who) + " center has wrong dimension");
    if (term.family == GainFamily::Hat || term.family == GainFamily::Bump) {
      require(term.width > 0.0, std::string(who) + " width must be positive");
    }
  }
}

}  // namespace

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double GainTerm::operator()(double t, std::span<const double> x) const {
  switch (family) {
    case GainFamily::Zero:
      return 0.0;
    case GainFamily::Constant:
      return amplitude;
    case GainFamily::Hat: {
      double dist = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        dist = std::max(dist, std::abs(x[i] - center_component(center, i)));
      }
      return amplitude * std::max(0.0, 1.0 - dist / width);
    }
    case GainFamily::Bump: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - center_component(center, i);
        r2 += d * d;
      }
      return amplitude * std::exp(-r2 / (2.0 * width * width));
    }
    case GainFamily::Trig: {
      double v = amplitude * std::cos(time_freq * t);
      for (double xi : x) v *= std::cos(space_freq * xi);
      return v;
    }
  }
  return 0.0;
}

double Payoff::operator()(double t, std::span<const double> x) const {
  double v = 0.0;
  for (const auto& term : terms) v += term(t, x);
  return v;
}

double AffineCost::factor(double t) const {
  switch (modulation) {
    case Modulation::None:
      return 1.0;
    case Modulation::Linear:
      return 1.0 + modulation_amplitude * t;
    case Modulation::Sine:
      return 1.0 + modulation_amplitude * std::sin(modulation_frequency * t);
  }
  return 1.0;
}

double AffineCost::operator()(double t, std::span<const double> action) const {
  return factor(t) * (fixed + proportional * euclidean_norm(action));
}

bool Cone::contains(std::span<const double> v, double tol) const {
  if (v.size() != direction.size()) return false;
  if (family == ConeFamily::Orthant) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (direction[i] > 0.0 && v[i] < -tol) return false;
      if (direction[i] < 0.0 && v[i] > tol) return false;
    }
    return true;
  }
  const double dd = std::inner_product(direction.begin(), direction.end(), direction.begin(), 0.0);
  const double vd = std::inner_product(v.begin(), v.end(), direction.begin(), 0.0);
  if (vd < -tol) return false;
  const double lambda = vd / dd;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i] - lambda * direction[i]) > tol * (1.0 + std::abs(v[i]))) return false;
  }
  return true;
}

void ProblemSpec::check_well_formed(bool allow_empty_actions) const {
  require(dim >= 1, "dim must be at least 1");
  require(std::isfinite(horizon) && horizon > 0.0, "horizon must be positive");
  require(drift.matrix.empty() || drift.matrix.size() == dim * dim,
          "drift_matrix must have dim*dim entries");
  require(drift.offset.empty() || drift.offset.size() == dim,
          "drift_offset must have dim entries");
  require(all_finite(drift.matrix) && all_finite(drift.offset), "drift is not finite");
  require(diffusion.scale.size() == dim, "diffusion_scale must have dim entries");
  require(diffusion.family == DiffusionFamily::Constant || diffusion.slope.size() == dim,
          "diffusion_slope must have dim entries");
  require(all_finite(diffusion.scale) && all_finite(diffusion.slope), "diffusion is not finite");
  check_payoff(running_gain, dim, "running gain");
  check_payoff(terminal_gain, dim, "terminal gain");
  check_cost(cost_I, horizon, "I");
  check_cost(cost_II, horizon, "II");
  check_action_set(actions_I, dim, "I", allow_empty_actions);
  check_action_set(actions_II, dim, "II", allow_empty_actions);
}

double ProblemSpec::drift_component(std::size_t i, double /*t*/,
                                    std::span<const double> x) const {
  double v = drift.offset.empty() ? 0.0 : drift.offset[i];
  if (!drift.matrix.empty()) {
    for (std::size_t j = 0; j < dim; ++j) v += drift.matrix[i * dim + j] * x[j];
  }
  return v;
}

double ProblemSpec::diffusion_diagonal(std::size_t i, double /*t*/,
                                       std::span<const double> x) const {
  double v = diffusion.scale[i];
  if (diffusion.family == DiffusionFamily::DiagonalAffine) v += diffusion.slope[i] * x[i];
  return v;
}

Coefficients evaluate_coefficients(const ProblemSpec& spec, double t,
                                   std::span<const double> x) {
  if (!std::isfinite(t) || !all_finite(x)) {
    throw SpecError("evaluate_coefficients: non-finite input");
  }
  if (t < 0.0 || t > spec.horizon) {
    throw SpecError("evaluate_coefficients: t outside [0, T]");
  }
  if (x.size() != spec.dim) {
    throw SpecError("evaluate_coefficients: state has wrong dimension");
  }
  Coefficients c;
  c.drift.resize(spec.dim);
  c.diffusion.assign(spec.dim * spec.dim, 0.0);
  for (std::size_t i = 0; i < spec.dim; ++i) {
    c.drift[i] = spec.drift_component(i, t, x);
    c.diffusion[i * spec.dim + i] = spec.diffusion_diagonal(i, t, x);
  }
  c.running = spec.running(t, x);
  return c;
}

const CheckResult* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace qvigame
