#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvi/core_types.hpp"
#include "qvi/problems.hpp"
#include "qvi/trace.hpp"

namespace qvi::cli {

enum ExitCode : int {
  kConverged = 0,
  kNotConverged = 2,
  kConfigError = 3,
  kRuntimeFailure = 4,
};

/// Schema or file problem in an experiment config. `field` is the dotted path
/// of the offending entry when one applies.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message);
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Algorithm {
  GradProj,
  Alg1,
  Alg2,
  Explicit,
  ShortExplicit,
  InertialA,
  InertialB,
  InertialC,
  OdeRk4,
  OdeEuler,
};

const char* to_string(Algorithm a);
/// Throws ConfigError("algorithm", ...) for unknown names.
Algorithm parse_algorithm(const std::string& name);

enum class TraceFormat { Csv, Json };

struct OutputConfig {
  std::string trace_path;  ///< empty: no trace file
  TraceFormat format = TraceFormat::Csv;
};

/// Starting point: explicit vector, zeros, or a seeded Gaussian draw.
struct InitConfig {
  enum class Kind { Zero, Vector, Random } kind = Kind::Zero;
  qvi::Vector point;
  double scale = 1.0;
};

struct ExperimentConfig {
  std::string problem_type;   ///< toy1d | obstacle | gnep | custom
  nlohmann::json problem;     ///< the validated problem object
  Algorithm algorithm = Algorithm::GradProj;
  SolverConfig solver;
  std::uint64_t seed = 0;
  InitConfig init;
  OutputConfig output;
};

/// Reads a JSON file. Throws ConfigError for a missing file or invalid JSON.
nlohmann::json read_config_json(const std::string& path);

/// Applies "a.b.c=value". The value is parsed as JSON when possible and kept as
/// a string otherwise. Intermediate objects are created as needed.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Validates the document against the experiment schema.
ExperimentConfig parse_config(const nlohmann::json& doc);

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// The problem instance of a config together with the game, when there is one.
struct BuiltProblem {
  std::shared_ptr<const QviProblem> problem;
  std::shared_ptr<const GnepGame> game;
};

/// Throws ConfigError for invalid problem parameters.
BuiltProblem build_problem(const ExperimentConfig& cfg);

/// Starting point for the configured problem.
qvi::Vector initial_point(const ExperimentConfig& cfg, Index dim);

struct RunOutcome {
  int exit_code = kRuntimeFailure;
  bool converged = false;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  double wall_seconds = 0.0;
  Trace trace;
  std::vector<std::string> warnings;
  std::string error;  ///< set on runtime failure
  /// One line: status, residual, iterations, converged flag, wall time.
  [[nodiscard]] std::string summary() const;
};

/// Builds the problem, runs the algorithm and writes the trace. Runtime
/// failures (divergence, inner solver, I/O) are reported with exit code 4.
RunOutcome run_experiment(const ExperimentConfig& cfg);

// Trace serialization -------------------------------------------------------

/// Header `k,residual,dist_ref,step_norm`, then one row per record with 17
/// significant digits.
std::string trace_to_csv(const Trace& trace);
std::string trace_to_json(const Trace& trace);
Trace trace_from_json(const std::string& text);

/// Throws Error when the file cannot be written.
void write_trace(const Trace& trace, const std::string& path, TraceFormat format);

/// "out/trace.csv" with suffix "0.5" -> "out/trace_0.5.csv".
std::string suffixed_path(const std::string& path, const std::string& suffix);

}  // namespace qvi::cli
