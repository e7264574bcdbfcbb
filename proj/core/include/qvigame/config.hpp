#pragma once

// Problem configuration files.
//
// Sections [problem], [dynamics], [payoffs], [costs], [actions], [solver]
// are required; [simulation] is optional. Lines are `key = value`; `#`
// starts a comment. Vectors are comma separated, lists of vectors are
// separated by `;`. Unknown sections or keys are errors.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qvigame/grid.hpp"
#include "qvigame/problem.hpp"
#include "qvigame/simulator.hpp"
#include "qvigame/solver.hpp"

namespace qvigame {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0, std::string field = {})
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}

  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

struct RunConfig {
  ProblemSpec problem;
  GridRequest grid;
  SolveOptions solver;
  double act_tol = 1e-8;
  SimConfig simulation;
  double allowance = 0.05;
  std::optional<double> dpp_at;
};

/// Parses configuration text. Throws ConfigError with the offending line
/// and `section.key` on any syntax, type or vocabulary error.
[[nodiscard]] RunConfig parse_config(std::string_view text);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

}  // namespace qvigame
