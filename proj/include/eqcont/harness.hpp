#pragma once

#include "eqcont/core.hpp"
#include "eqcont/discretization.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eqc::harness {

using json = nlohmann::json;

enum class Mode { Analyze, Continue, Verify, Project };

Mode parse_mode(const std::string& name);
const char* to_string(Mode mode);

/// Validated experiment configuration. `raw` keeps the merged document that
/// is echoed into the report.
struct ExperimentConfig {
  json raw;
  std::string kind;     // cmc | geodesic | harmonic
  std::string catalog;  // catalog entry the config was expanded from, if any
  json params;
  Index n = 64;
  Scheme scheme = Scheme::Spectral;
  SolverOptions solver;
  StepPolicy policy;
  double lambda0 = 0.0;
  double lambda1 = 1.0;
  int trials = 20;
  double radius = 0.3;
  std::uint64_t seed = 1;
  std::string output = "eqcont_out";
  std::optional<std::string> expect_status;
  std::optional<std::string> expect_verdict;
  std::optional<std::string> expect_error;
};

/// Expands catalog names, applies defaults and validates. Throws
/// ConfigInvalid (with a suggestion for near-miss names).
ExperimentConfig parse_config(const json& doc);

struct CatalogEntry {
  std::string name;
  std::string description;
  Interval lambda_range;
  json config;
};

const std::vector<CatalogEntry>& catalog();

/// Closest candidate by edit distance, or empty when nothing is close.
std::string suggest(const std::string& name, const std::vector<std::string>& candidates);

/// A problem assembled from a config together with its starting state.
struct BuiltProblem {
  ProblemInstance problem;
  Vec x0;
  Index components = 1;  // state blocks of one grid function each
  int grid_dim = 1;
};

BuiltProblem build_problem(const ExperimentConfig& config);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  Mode mode = Mode::Analyze;
  json doc;
  std::vector<Check> checks;
  std::optional<Branch> branch;
  std::optional<std::string> error_kind;

  bool pass() const;
};

/// Runs one pipeline. Solver errors are captured in the report
/// (error_kind) unless they are configuration errors, which propagate.
RunReport run(const ExperimentConfig& config, Mode mode);

/// Writes report.json and, for continuation runs, branch.csv and states.csv.
void write_outputs(const RunReport& report, const std::string& directory);

/// 0 when every check passes, 1 when a check fails, 3 on an unexpected
/// solver error. Configuration errors map to 2 in the CLI.
int exit_code(const RunReport& report);

/// Row checksum of a state written to branch.csv: sum_i (i + 1) x_i / n.
double state_checksum(const Vec& x);

}  // namespace eqc::harness
