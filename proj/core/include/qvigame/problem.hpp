#pragma once

// Game instance: controlled diffusion, payoffs, intervention costs and the
// two players' discretized action cones.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qvigame {

using Vector = std::vector<double>;

/// Thrown when a ProblemSpec is structurally malformed.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which player's impulse counts when both act at the same instant.
enum class Priority { PlayerII, PlayerI };

enum class Player { I, II };

/// b(t,x) = A x + beta.
struct AffineDrift {
  Vector matrix;  // row-major dim x dim; empty means zero
  Vector offset;  // empty means zero
};

enum class DiffusionFamily { Constant, DiagonalAffine };

/// sigma(t,x) = diag(scale_i + slope_i * x_i). `slope` is ignored by the
/// Constant family.
struct Diffusion {
  DiffusionFamily family = DiffusionFamily::Constant;
  Vector scale;
  Vector slope;
};

enum class GainFamily { Zero, Constant, Hat, Bump, Trig };

/// One term of a running or terminal gain.
///
///   Constant: amplitude
///   Hat:      amplitude * max(0, 1 - |x - center|_inf / width)
///   Bump:     amplitude * exp(-|x - center|^2 / (2 width^2))
///   Trig:     amplitude * cos(time_freq t) * prod_i cos(space_freq x_i)
struct GainTerm {
  GainFamily family = GainFamily::Zero;
  double amplitude = 0.0;
  Vector center;  // empty means the origin
  double width = 1.0;
  double time_freq = 0.0;
  double space_freq = 0.0;

  [[nodiscard]] double operator()(double t, std::span<const double> x) const;
};

/// Sum of gain terms; an empty payoff is identically zero.
struct Payoff {
  std::vector<GainTerm> terms;

  [[nodiscard]] double operator()(double t, std::span<const double> x) const;
};

enum class Modulation { None, Linear, Sine };

/// c(t, xi) = m(t) * (fixed + proportional * |xi|) with
/// m(t) = 1, 1 + a t, or 1 + a sin(w t).
struct AffineCost {
  double fixed = 0.0;
  double proportional = 0.0;
  Modulation modulation = Modulation::None;
  double modulation_amplitude = 0.0;
  double modulation_frequency = 0.0;

  [[nodiscard]] double factor(double t) const;
  [[nodiscard]] double operator()(double t, std::span<const double> action) const;
};

enum class ConeFamily { Orthant, Ray };

/// Closed convex cone. Orthant: component i constrained by sign(direction_i)
/// (0 leaves it free). Ray: nonnegative multiples of `direction`.
struct Cone {
  ConeFamily family = ConeFamily::Orthant;
  Vector direction;

  [[nodiscard]] bool contains(std::span<const double> v, double tol = 1e-12) const;
};

struct ActionSet {
  Cone cone;
  std::vector<Vector> actions;
};

struct ProblemSpec {
  std::size_t dim = 1;
  double horizon = 1.0;
  AffineDrift drift;
  Diffusion diffusion;
  Payoff running_gain;
  Payoff terminal_gain;
  AffineCost cost_I;
  AffineCost cost_II;
  ActionSet actions_I;
  ActionSet actions_II;
  Priority priority = Priority::PlayerII;

  /// Throws SpecError on structural problems. Empty action lists are
  /// rejected unless `allow_empty_actions` is set (a player that never
  /// intervenes).
  void check_well_formed(bool allow_empty_actions = false) const;

  [[nodiscard]] double drift_component(std::size_t i, double t,
                                       std::span<const double> x) const;
  [[nodiscard]] double diffusion_diagonal(std::size_t i, double t,
                                          std::span<const double> x) const;
  [[nodiscard]] double running(double t, std::span<const double> x) const {
    return running_gain(t, x);
  }
  [[nodiscard]] double terminal(std::span<const double> x) const {
    return terminal_gain(horizon, x);
  }
  [[nodiscard]] const AffineCost& cost(Player p) const {
    return p == Player::I ? cost_I : cost_II;
  }
  [[nodiscard]] const ActionSet& actions(Player p) const {
    return p == Player::I ? actions_I : actions_II;
  }
};

struct Coefficients {
  Vector drift;      // length dim
  Vector diffusion;  // dim x dim, row-major
  double running = 0.0;
};

/// b, sigma and f at (t, x). Throws SpecError on non-finite input or t
/// outside [0, T].
[[nodiscard]] Coefficients evaluate_coefficients(const ProblemSpec& spec, double t,
                                                 std::span<const double> x);

[[nodiscard]] double euclidean_norm(std::span<const double> v);

// ---------------------------------------------------------------------------
// Standing-assumption checks
// ---------------------------------------------------------------------------

/// Point at which a check attains its worst margin.
struct Witness {
  double t = 0.0;
  Vector x;
  std::vector<Vector> actions;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Worst-case slack of the inequality; negative means violated.
  double margin = 0.0;
  std::optional<Witness> witness;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool overall = false;

  [[nodiscard]] const CheckResult* find(std::string_view name) const;
};

/// Sample lattice and thresholds used by validate_assumptions.
struct ValidationSettings {
  Vector lower;  // empty: [-1, 1] per dimension
  Vector upper;
  std::size_t state_points = 81;  // per dimension
  std::size_t time_points = 11;
  double lipschitz_cap = 1e3;
  double bound_cap = 1e6;
  double cost_floor = 0.1;     // k
  double strict_margin = 0.05;  // constant h
};

namespace checks {
inline constexpr const char* kLipschitz = "lipschitz_growth";
inline constexpr const char* kBounded = "bounded_payoffs";
inline constexpr const char* kCostFloor = "cost_floor";
inline constexpr const char* kSubadditive = "subadditivity";
inline constexpr const char* kNoTerminalImpulse = "no_terminal_impulse";
inline constexpr const char* kStrictSubadditive = "strict_subadditivity";
}  // namespace checks

/// Runs the six standing-assumption checks on a deterministic lattice.
/// Failures are reported, never thrown; a malformed spec throws SpecError.
[[nodiscard]] ValidationReport validate_assumptions(const ProblemSpec& spec,
                                                    const ValidationSettings& settings);

}  // namespace qvigame
