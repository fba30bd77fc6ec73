#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qvi/cli/experiment.hpp"

namespace {

using namespace qvi::cli;

int report_config_error(const std::exception& e) {
  std::cerr << "config error: " << e.what() << "\n";
  return kConfigError;
}

int run_one(const ExperimentConfig& cfg, bool quiet, const std::string& tag = {}) {
  const RunOutcome out = run_experiment(cfg);
  if (out.exit_code == kConfigError) {
    std::cerr << "config error: " << out.error << "\n";
    return out.exit_code;
  }
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  if (out.exit_code == kRuntimeFailure) std::cerr << "error: " << out.error << "\n";
  if (!quiet) std::cout << (tag.empty() ? "" : tag + " ") << out.summary() << "\n";
  return out.exit_code;
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for quasi-variational inequalities with moving constraint sets"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  bool quiet = false;

  auto* solve = app.add_subcommand("solve", "Run one experiment");
  solve->add_option("--config", config, "Experiment JSON")->required();
  solve->add_option("--override", overrides, "Dotted key=value substitution")->take_all();
  solve->add_flag("--quiet", quiet, "Suppress the summary line");

  auto* validate = app.add_subcommand("validate", "Parse and check a config");
  validate->add_option("--config", config, "Experiment JSON")->required();
  validate->add_option("--override", overrides, "Dotted key=value substitution")->take_all();

  std::string param;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sweep->add_option("--config", config, "Experiment JSON")->required();
  sweep->add_option("--param", param, "Dotted parameter path")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--override", overrides, "Dotted key=value substitution")->take_all();
  sweep->add_flag("--quiet", quiet, "Suppress summary lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*solve) return run_one(load_config(config, overrides), quiet);

    if (*validate) {
      const ExperimentConfig cfg = load_config(config, overrides);
      const BuiltProblem built = build_problem(cfg);
      initial_point(cfg, built.problem->dim());
      std::cout << "ok: " << cfg.problem_type << " / " << to_string(cfg.algorithm) << "\n";
      return kConverged;
    }

    const auto list = split_values(values);
    if (list.empty()) throw ConfigError("--values", "no values given");
    nlohmann::json base = read_config_json(config);
    for (const auto& o : overrides) apply_override(base, o);
    int worst = kConverged;
    for (const auto& v : list) {
      nlohmann::json doc = base;
      apply_override(doc, param + "=" + v);
      ExperimentConfig cfg = parse_config(doc);
      if (!cfg.output.trace_path.empty())
        cfg.output.trace_path = suffixed_path(cfg.output.trace_path, v);
      const int rc = run_one(cfg, quiet, param + "=" + v);
      worst = std::max(worst, rc);
    }
    return worst;
  } catch (const ConfigError& e) {
    return report_config_error(e);
  } catch (const qvi::InvalidInput& e) {
    return report_config_error(e);
  } catch (const qvi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}
