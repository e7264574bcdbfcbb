#include "qvigame/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace qvigame {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    parts.push_back(trim(s.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

const std::set<std::string, std::less<>> kSections = {
    "problem", "dynamics", "payoffs", "costs", "actions", "solver", "simulation"};
const std::set<std::string, std::less<>> kRequiredSections = {
    "problem", "dynamics", "payoffs", "costs", "actions", "solver"};

class Document {
 public:
  explicit Document(std::string_view text) {
    std::string current;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto eol = text.find('\n', pos);
      std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
      pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("malformed section header", line_no);
        current = std::string(trim(line.substr(1, line.size() - 2)));
        if (!kSections.contains(current)) {
          throw ConfigError("unknown section [" + current + "]", line_no, current);
        }
        if (sections_.contains(current)) {
          throw ConfigError("duplicate section [" + current + "]", line_no, current);
        }
        sections_[current];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("expected `key = value`", line_no);
      }
      if (current.empty()) throw ConfigError("key outside of any section", line_no);
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      const std::string field = current + "." + key;
      if (key.empty()) throw ConfigError("empty key", line_no, field);
      auto& sec = sections_[current];
      if (sec.contains(key)) throw ConfigError("duplicate key " + field, line_no, field);
      sec[key] = Entry{value, line_no, false};
    }
    for (const auto& name : kRequiredSections) {
      if (!sections_.contains(name)) {
        throw ConfigError("missing section [" + name + "]", 0, name);
      }
    }
  }

  [[nodiscard]] bool has_section(std::string_view s) const { return sections_.contains(std::string(s)); }

  Entry* find(std::string_view sec, std::string_view key) {
    auto s = sections_.find(std::string(sec));
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(std::string(key));
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  Entry& require(std::string_view sec, std::string_view key) {
    Entry* e = find(sec, key);
    if (e == nullptr) {
      const std::string field = std::string(sec) + "." + std::string(key);
      throw ConfigError("missing required key " + field, 0, field);
    }
    return *e;
  }

  void reject_unused() const {
    for (const auto& [sec, keys] : sections_) {
      for (const auto& [key, entry] : keys) {
        if (!entry.used) {
          const std::string field = sec + "." + key;
          throw ConfigError("unknown key " + field, entry.line, field);
        }
      }
    }
  }

 private:
  std::map<std::string, std::map<std::string, Entry>, std::less<>> sections_;
};

double to_number(std::string_view token, const Entry& e, const std::string& field) {
  double v = 0.0;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (token.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("expected a decimal number for " + field + ", got `" + std::string(token) + "`",
                      e.line, field);
  }
  return v;
}

class Reader {
 public:
  explicit Reader(Document& doc) : doc_(doc) {}

  double number(std::string_view sec, std::string_view key, std::optional<double> fallback = {}) {
    Entry* e = fallback ? doc_.find(sec, key) : &doc_.require(sec, key);
    if (e == nullptr) return *fallback;
    return to_number(trim(e->value), *e, field(sec, key));
  }

  std::size_t count(std::string_view sec, std::string_view key,
                    std::optional<std::size_t> fallback = {}) {
    Entry* e = fallback ? doc_.find(sec, key) : &doc_.require(sec, key);
    if (e == nullptr) return *fallback;
    return to_count(trim(e->value), *e, field(sec, key));
  }

  Vector vector(std::string_view sec, std::string_view key, std::optional<Vector> fallback = {}) {
    Entry* e = fallback ? doc_.find(sec, key) : &doc_.require(sec, key);
    if (e == nullptr) return *fallback;
    return parse_vector(e->value, *e, field(sec, key));
  }

  std::vector<Vector> vector_list(std::string_view sec, std::string_view key) {
    Entry& e = doc_.require(sec, key);
    std::vector<Vector> out;
    if (trim(e.value).empty()) return out;
    for (auto part : split(e.value, ';')) {
      if (part.empty()) continue;
      out.push_back(parse_vector(part, e, field(sec, key)));
    }
    return out;
  }

  std::string word(std::string_view sec, std::string_view key,
                   std::optional<std::string> fallback = {}) {
    Entry* e = fallback ? doc_.find(sec, key) : &doc_.require(sec, key);
    if (e == nullptr) return *fallback;
    return e->value;
  }

  template <typename Enum>
  Enum choice(std::string_view sec, std::string_view key,
              const std::vector<std::pair<std::string, Enum>>& options,
              std::optional<std::string> fallback = {}) {
    const std::string w = word(sec, key, fallback);
    for (const auto& [name, value] : options) {
      if (name == w) return value;
    }
    std::string allowed;
    for (const auto& o : options) allowed += (allowed.empty() ? "" : ", ") + o.first;
    Entry* e = doc_.find(sec, key);
    throw ConfigError("unknown family `" + w + "` for " + field(sec, key) + " (expected one of: " +
                          allowed + ")",
                      e ? e->line : 0, field(sec, key));
  }

  bool flag(std::string_view sec, std::string_view key, bool fallback) {
    Entry* e = doc_.find(sec, key);
    if (e == nullptr) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    throw ConfigError("expected true or false for " + field(sec, key), e->line, field(sec, key));
  }

 private:
  static std::string field(std::string_view sec, std::string_view key) {
    return std::string(sec) + "." + std::string(key);
  }

  static std::size_t to_count(std::string_view token, const Entry& e, const std::string& f) {
    std::size_t v = 0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (token.empty() || ec != std::errc() || ptr != end) {
      throw ConfigError("expected a nonnegative integer for " + f, e.line, f);
    }
    return v;
  }

  static Vector parse_vector(std::string_view text, const Entry& e, const std::string& f) {
    Vector v;
    for (auto token : split(text, ',')) v.push_back(to_number(token, e, f));
    return v;
  }

  Document& doc_;
};

void expect_size(const Vector& v, std::size_t n, const std::string& field) {
  if (v.size() != n) {
    throw ConfigError(field + " must have " + std::to_string(n) + " components", 0, field);
  }
}

GainTerm read_gain(Reader& r, const std::string& prefix, bool terminal, std::size_t dim) {
  using P = std::pair<std::string, GainFamily>;
  const std::vector<P> running_families = {{"zero", GainFamily::Zero},
                                           {"constant", GainFamily::Constant},
                                           {"bump", GainFamily::Bump},
                                           {"trig", GainFamily::Trig}};
  const std::vector<P> terminal_families = {{"hat", GainFamily::Hat},
                                            {"gaussian", GainFamily::Bump},
                                            {"constant", GainFamily::Constant}};
  GainTerm term;
  term.family = terminal ? r.choice<GainFamily>("payoffs", prefix, terminal_families)
                         : r.choice<GainFamily>("payoffs", prefix, running_families, "zero");
  term.amplitude = r.number("payoffs", prefix + "_amplitude", 0.0);
  term.center = r.vector("payoffs", prefix + "_center", Vector(dim, 0.0));
  expect_size(term.center, dim, "payoffs." + prefix + "_center");
  term.width = r.number("payoffs", prefix + "_width", 1.0);
  term.time_freq = r.number("payoffs", prefix + "_time_freq", 0.0);
  term.space_freq = r.number("payoffs", prefix + "_space_freq", 0.0);
  return term;
}

AffineCost read_cost(Reader& r, const std::string& who) {
  const std::string p = "cost_" + who + "_";
  AffineCost c;
  c.fixed = r.number("costs", p + "fixed");
  c.proportional = r.number("costs", p + "proportional");
  c.modulation = r.choice<Modulation>(
      "costs", p + "modulation",
      {{"none", Modulation::None}, {"linear", Modulation::Linear}, {"sine", Modulation::Sine}},
      "none");
  c.modulation_amplitude = r.number("costs", p + "modulation_amplitude", 0.0);
  c.modulation_frequency = r.number("costs", p + "modulation_frequency", 0.0);
  return c;
}

ActionSet read_actions(Reader& r, const std::string& who, std::size_t dim) {
  ActionSet set;
  set.actions = r.vector_list("actions", "actions_" + who);
  set.cone.family = r.choice<ConeFamily>(
      "actions", "cone_" + who, {{"orthant", ConeFamily::Orthant}, {"ray", ConeFamily::Ray}},
      "orthant");
  set.cone.direction = r.vector("actions", "cone_" + who + "_direction");
  expect_size(set.cone.direction, dim, "actions.cone_" + who + "_direction");
  return set;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  Document doc(text);
  Reader r(doc);
  RunConfig cfg;
  auto& spec = cfg.problem;

  // [problem]
  spec.dim = r.count("problem", "dim");
  if (spec.dim < 1 || spec.dim > 3) throw ConfigError("problem.dim must be 1, 2 or 3", 0, "problem.dim");
  const std::size_t d = spec.dim;
  spec.horizon = r.number("problem", "horizon");
  spec.priority = r.choice<Priority>(
      "problem", "priority", {{"player_ii", Priority::PlayerII}, {"player_i", Priority::PlayerI}},
      "player_ii");

  // [dynamics]
  (void)r.choice<int>("dynamics", "drift", {{"affine", 0}}, "affine");
  spec.drift.matrix = r.vector("dynamics", "drift_matrix", Vector(d * d, 0.0));
  expect_size(spec.drift.matrix, d * d, "dynamics.drift_matrix");
  spec.drift.offset = r.vector("dynamics", "drift_offset", Vector(d, 0.0));
  expect_size(spec.drift.offset, d, "dynamics.drift_offset");
  spec.diffusion.family = r.choice<DiffusionFamily>(
      "dynamics", "diffusion",
      {{"constant", DiffusionFamily::Constant}, {"diagonal_affine", DiffusionFamily::DiagonalAffine}},
      "constant");
  spec.diffusion.scale = r.vector("dynamics", "diffusion_scale");
  expect_size(spec.diffusion.scale, d, "dynamics.diffusion_scale");
  spec.diffusion.slope = r.vector("dynamics", "diffusion_slope", Vector(d, 0.0));
  expect_size(spec.diffusion.slope, d, "dynamics.diffusion_slope");

  // [payoffs]
  spec.running_gain.terms = {read_gain(r, "running", false, d)};
  spec.terminal_gain.terms = {read_gain(r, "terminal", true, d)};

  // [costs]
  spec.cost_I = read_cost(r, "I");
  spec.cost_II = read_cost(r, "II");
  cfg.solver.validation.cost_floor = r.number("costs", "cost_floor", 0.1);
  cfg.solver.validation.strict_margin = r.number("costs", "strict_margin", 0.05);

  // [actions]
  spec.actions_I = read_actions(r, "I", d);
  spec.actions_II = read_actions(r, "II", d);

  // [solver]
  auto& g = cfg.grid;
  g.lower = r.vector("solver", "lower");
  g.upper = r.vector("solver", "upper");
  expect_size(g.lower, d, "solver.lower");
  expect_size(g.upper, d, "solver.upper");
  const Vector nodes = r.vector("solver", "nodes");
  expect_size(nodes, d, "solver.nodes");
  for (double n : nodes) {
    if (n < 3 || n != std::floor(n)) throw ConfigError("solver.nodes must be integers >= 3", 0, "solver.nodes");
    g.nodes.push_back(static_cast<std::size_t>(n));
  }
  const std::string steps = r.word("solver", "time_steps", "auto");
  if (steps == "auto") {
    g.time_steps = 0;
  } else {
    Entry fake{steps, 0, true};
    const double v = to_number(steps, fake, "solver.time_steps");
    if (v < 1 || v != std::floor(v)) {
      throw ConfigError("solver.time_steps must be `auto` or a positive integer", 0, "solver.time_steps");
    }
    g.time_steps = static_cast<std::size_t>(v);
  }
  g.cfl_safety = r.number("solver", "cfl_safety", 0.95);
  g.boundary = r.choice<Boundary>(
      "solver", "boundary",
      {{"neumann", Boundary::NeumannZeroSecond}, {"dirichlet", Boundary::DirichletFrozen}},
      "neumann");
  cfg.solver.fp_tol = r.number("solver", "fp_tol", 1e-9);
  cfg.solver.fp_max_iter = static_cast<int>(r.count("solver", "fp_max_iter", 200));
  cfg.solver.transform_tol = r.number("solver", "transform_tol", 5e-6);
  cfg.act_tol = r.number("solver", "act_tol", 10.0 * cfg.solver.fp_tol);
  cfg.solver.allow_assumption_violations = r.flag("solver", "allow_assumption_violations", false);
  cfg.solver.validation.state_points = r.count("solver", "validation_states", 81);
  cfg.solver.validation.time_points = r.count("solver", "validation_times", 11);
  cfg.solver.validation.lipschitz_cap = r.number("solver", "lipschitz_cap", 1e3);
  cfg.solver.validation.lower = g.lower;
  cfg.solver.validation.upper = g.upper;

  // [simulation]
  auto& sim = cfg.simulation;
  sim.paths = r.count("simulation", "paths", 100000);
  sim.seed = r.count("simulation", "seed", 1);
  sim.substeps = r.count("simulation", "substeps", 1);
  sim.t0 = r.number("simulation", "t0", 0.0);
  sim.x0 = r.vector("simulation", "x0", Vector(d, 0.0));
  expect_size(sim.x0, d, "simulation.x0");
  cfg.allowance = r.number("simulation", "allowance", 0.05);
  if (doc.find("simulation", "dpp_at") != nullptr) cfg.dpp_at = r.number("simulation", "dpp_at");

  doc.reject_unused();

  try {
    spec.check_well_formed();
  } catch (const SpecError& e) {
    throw ConfigError(std::string("invalid problem: ") + e.what());
  }
  return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path));
}

}  // namespace qvigame
