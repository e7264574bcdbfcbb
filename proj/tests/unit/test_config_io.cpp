#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "qvigame/config.hpp"
#include "qvigame/io.hpp"

using namespace qvigame;

namespace {

std::string reference_text() { return read_text_file(fixtures::configs_dir() / "reference_1d.ini"); }

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("reference config matches the programmatic reference problem") {
  const RunConfig cfg = parse_config(reference_text());
  const ProblemSpec expected = fixtures::reference_spec();
  const ProblemSpec& got = cfg.problem;
  CHECK(got.dim == 1);
  CHECK(got.horizon == 1.0);
  CHECK(got.priority == Priority::PlayerII);
  CHECK(got.diffusion.scale == expected.diffusion.scale);
  CHECK(got.cost_I.fixed == expected.cost_I.fixed);
  CHECK(got.cost_I.proportional == expected.cost_I.proportional);
  CHECK(got.cost_II.fixed == expected.cost_II.fixed);
  CHECK(got.cost_II.proportional == expected.cost_II.proportional);
  CHECK(got.actions_I.actions == expected.actions_I.actions);
  CHECK(got.actions_II.actions == expected.actions_II.actions);
  for (double x : {-1.5, -0.3, 0.0, 0.2, 0.9}) {
    for (double t : {0.0, 0.5}) {
      CHECK(got.running(t, Vector{x}) == expected.running(t, Vector{x}));
    }
    CHECK(got.terminal(Vector{x}) == expected.terminal(Vector{x}));
  }
  CHECK(cfg.grid.nodes == std::vector<std::size_t>{401});
  CHECK(cfg.grid.time_steps == 0);
  CHECK(cfg.solver.fp_tol == 1e-9);
  CHECK(cfg.act_tol == doctest::Approx(1e-8));
  CHECK(cfg.simulation.paths == 100000);
  CHECK(cfg.allowance == 0.05);
  CHECK_FALSE(cfg.dpp_at.has_value());
}

TEST_CASE("config errors carry line and field") {
  const std::string text = reference_text();
  SUBCASE("missing section") {
    std::string broken = replace(text, "[costs]", "[costz]");
    CHECK_THROWS_AS((void)parse_config(broken), ConfigError);
  }
  SUBCASE("unknown key") {
    const std::string broken = replace(text, "nodes = 401", "nodes = 401\nnodez = 3");
    try {
      (void)parse_config(broken);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "solver.nodez");
      CHECK(e.line() > 0);
    }
  }
  SUBCASE("bad number") {
    const std::string broken = replace(text, "horizon = 1.0", "horizon = one");
    try {
      (void)parse_config(broken);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "problem.horizon");
      CHECK(e.line() == 6);
    }
  }
  SUBCASE("unknown family") {
    CHECK_THROWS_AS((void)parse_config(replace(text, "running = bump", "running = spline")),
                    ConfigError);
  }
  SUBCASE("duplicate key") {
    CHECK_THROWS_AS((void)parse_config(replace(text, "dim = 1", "dim = 1\ndim = 1")), ConfigError);
  }
  SUBCASE("action outside its cone") {
    CHECK_THROWS_AS((void)parse_config(replace(text, "actions_I = 0.25; 0.5", "actions_I = -0.25")),
                    ConfigError);
  }
  SUBCASE("wrong vector length") {
    CHECK_THROWS_AS((void)parse_config(replace(text, "x0 = 0.0", "x0 = 0.0, 1.0")), ConfigError);
  }
}

TEST_CASE("every shipped config parses") {
  for (const auto& entry : std::filesystem::directory_iterator(fixtures::configs_dir())) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW((void)load_config(entry.path()));
  }
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.0 - 1e-16}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("value CSV round-trips losslessly") {
  const auto spec = fixtures::reference_spec();
  GridRequest req = fixtures::reference_grid(9);
  req.time_steps = 3;
  const Grid g = build_grid(spec, req);
  SolveResult r;
  for (std::size_t n = 0; n <= 3; ++n) {
    ValueField f{g.time(n), std::vector<double>(9)};
    for (std::size_t p = 0; p < 9; ++p) f.values[p] = std::sin(0.37 * static_cast<double>(n * 9 + p)) / 3.0;
    r.stack.push_back(f);
  }
  std::ostringstream out;
  write_value_csv(out, r, g);
  const std::string text = out.str();
  CHECK(text.rfind("t,x1,V\n", 0) == 0);
  std::istringstream in(text);
  const auto back = read_value_csv(in, g);
  CHECK(max_stack_difference(r, back) == 0.0);
  for (std::size_t n = 0; n <= 3; ++n) CHECK(back.stack[n].t == r.stack[n].t);

  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS((void)read_value_csv(truncated, g));
}

TEST_CASE("sha256 of known inputs") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("validation JSON carries witnesses") {
  auto spec = fixtures::reference_spec();
  spec.cost_II.fixed = 0.0;
  const auto report = validate_assumptions(spec, {});
  const auto j = nlohmann::json::parse(validation_json(report));
  CHECK(j["overall"] == false);
  REQUIRE(j["checks"].size() == 6);
  for (const auto& c : j["checks"]) {
    if (c["passed"] == false) CHECK_FALSE(c["witness"].is_null());
  }
}
