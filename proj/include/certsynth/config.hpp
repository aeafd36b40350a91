#pragma once

#include <stdexcept>
#include <string>

#include "certsynth/benchmarks.hpp"
#include "certsynth/cegis.hpp"

namespace certsynth {

/// Configuration error; `line` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ProblemConfig {
  std::string name;
  int benchmark_id = 0;  // 0 for user configs
  PropertyProblem problem;
  CandidateShapes shapes;
  CegisConfig cegis;
};

/// Parses a YAML problem description (grammar in the README) and
/// validates the resulting problem. Throws ConfigError.
ProblemConfig parse_problem_config(const std::string& text);
ProblemConfig load_problem_config(const std::string& path);

ProblemConfig config_for(const BenchmarkEntry& e);

}  // namespace certsynth
