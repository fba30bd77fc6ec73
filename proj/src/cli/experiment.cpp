#include "qvi/cli/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "qvi/analysis.hpp"
#include "qvi/discrete_algorithms.hpp"
#include "qvi/dynamics.hpp"

namespace qvi::cli {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

namespace {

struct AlgorithmName {
  Algorithm algo;
  const char* name;
};

constexpr AlgorithmName kAlgorithms[] = {
    {Algorithm::GradProj, "grad_proj"},     {Algorithm::Alg1, "alg1"},
    {Algorithm::Alg2, "alg2"},              {Algorithm::Explicit, "explicit"},
    {Algorithm::ShortExplicit, "short_explicit"}, {Algorithm::InertialA, "inertial_a"},
    {Algorithm::InertialB, "inertial_b"},   {Algorithm::InertialC, "inertial_c"},
    {Algorithm::OdeRk4, "ode_rk4"},         {Algorithm::OdeEuler, "ode_euler"},
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "must be an object");
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key), "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj.at(key), join(path, key)) : fallback;
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw ConfigError(path, "must be a non-negative integer");
  return j.get<std::size_t>();
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(join(path, key), "required");
  return obj.at(key);
}

// Bounds may be null, meaning unbounded in the direction of `infinity`.
Vector vector_of(const json& j, const std::string& path, double null_value = std::nan("")) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "must be a nonempty array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (j[i].is_null() && !std::isnan(null_value))
      v(static_cast<Index>(i)) = null_value;
    else
      v(static_cast<Index>(i)) = number(j[i], p);
  }
  return v;
}

Matrix matrix_of(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError(path, "must be a nonempty array of rows");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string p = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(p, "rows must have equal length");
    m.row(static_cast<Index>(r)) = vector_of(j[r], p).transpose();
  }
  return m;
}

Index index_of(const json& j, const std::string& path) {
  const std::size_t n = count(j, path);
  if (n < 1) throw ConfigError(path, "must be >= 1");
  return static_cast<Index>(n);
}

BaseSet base_set_of(const json& j, const std::string& path) {
  require_object(j, path);
  const std::string type = field(j, "type", path).get<std::string>();
  const double inf = std::numeric_limits<double>::infinity();
  if (type == "box") {
    check_keys(j, path, {"type", "lo", "hi"});
    return Box{vector_of(field(j, "lo", path), join(path, "lo"), -inf),
               vector_of(field(j, "hi", path), join(path, "hi"), inf)};
  }
  if (type == "ball") {
    check_keys(j, path, {"type", "center", "radius"});
    return Ball{vector_of(field(j, "center", path), join(path, "center")),
                number(field(j, "radius", path), join(path, "radius"))};
  }
  if (type == "halfspace") {
    check_keys(j, path, {"type", "normal", "offset"});
    return Halfspace{vector_of(field(j, "normal", path), join(path, "normal")),
                     number(field(j, "offset", path), join(path, "offset"))};
  }
  if (type == "simplex") {
    check_keys(j, path, {"type", "dim", "radius"});
    return Simplex{index_of(field(j, "dim", path), join(path, "dim")),
                   number_or(j, "radius", path, 1.0)};
  }
  if (type == "orthant") {
    check_keys(j, path, {"type", "dim"});
    return NonnegOrthant{index_of(field(j, "dim", path), join(path, "dim"))};
  }
  if (type == "whole") {
    check_keys(j, path, {"type", "dim"});
    return WholeSpace{index_of(field(j, "dim", path), join(path, "dim"))};
  }
  throw ConfigError(join(path, "type"), "unknown base set '" + type + "'");
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj.at(key), join(path, key));
}

ShiftMap shift_of(const json& j, const std::string& path, Index dim) {
  require_object(j, path);
  const std::string type = field(j, "type", path).get<std::string>();
  if (type == "zero") {
    check_keys(j, path, {"type"});
    return ShiftMap::zero(dim);
  }
  if (type == "affine") {
    check_keys(j, path, {"type", "M", "c", "l"});
    const Matrix M = matrix_of(field(j, "M", path), join(path, "M"));
    const Vector c = j.contains("c") ? vector_of(j.at("c"), join(path, "c")) : Vector::Zero(M.rows());
    return ShiftMap::affine(M, c, optional_number(j, "l", path));
  }
  if (type == "min_broadcast") {
    check_keys(j, path, {"type", "offset", "l"});
    return ShiftMap::min_broadcast(dim, number_or(j, "offset", path, 0.0), optional_number(j, "l", path));
  }
  throw ConfigError(join(path, "type"), "unknown shift '" + type + "'");
}

QviProblem custom_problem(const json& j) {
  const std::string path = "problem";
  check_keys(j, path, {"type", "operator", "set", "x_ref", "label"});
  const json& op = field(j, "operator", path);
  require_object(op, "problem.operator");
  check_keys(op, "problem.operator", {"A", "b", "mu", "lip"});
  const Matrix A = matrix_of(field(op, "A", "problem.operator"), "problem.operator.A");
  const Vector b = op.contains("b") ? vector_of(op.at("b"), "problem.operator.b") : Vector::Zero(A.rows());
  const auto mu = optional_number(op, "mu", "problem.operator");
  const auto lip = optional_number(op, "lip", "problem.operator");
  if (mu.has_value() != lip.has_value())
    throw ConfigError("problem.operator", "mu and lip must be given together");
  OperatorSpec T = mu ? OperatorSpec::affine(A, b, *mu, *lip) : OperatorSpec::affine_exact(A, b);

  const json& set = field(j, "set", path);
  require_object(set, "problem.set");
  check_keys(set, "problem.set", {"base", "shift"});
  BaseSet base = base_set_of(field(set, "base", "problem.set"), "problem.set.base");
  ShiftMap shift = set.contains("shift") ? shift_of(set.at("shift"), "problem.set.shift", base.dim())
                                         : ShiftMap::zero(base.dim());
  std::optional<Vector> x_ref;
  if (j.contains("x_ref")) x_ref = vector_of(j.at("x_ref"), "problem.x_ref");
  return QviProblem(std::move(T), MovingSet(std::move(base), std::move(shift)), std::move(x_ref),
                    j.value("label", std::string("custom")));
}

ObstacleProblem obstacle_problem(const json& j) {
  const std::string path = "problem";
  check_keys(j, path, {"type", "n", "f", "k_offset", "a", "b"});
  const Index n = index_of(field(j, "n", path), "problem.n");
  Vector f;
  const json& jf = field(j, "f", path);
  if (jf.is_number())
    f = Vector::Constant(n, number(jf, "problem.f"));
  else
    f = vector_of(jf, "problem.f");
  return build_obstacle(n, f, number_or(j, "k_offset", path, 0.0), number_or(j, "a", path, 0.0),
                        number_or(j, "b", path, 1.0));
}

GnepGame gnep_game(const json& j) {
  const std::string path = "problem";
  check_keys(j, path, {"type", "dims", "A", "q", "lo", "hi", "shift_M", "shift_c"});
  GnepSpec s;
  const json& dims = field(j, "dims", path);
  if (!dims.is_array() || dims.empty()) throw ConfigError("problem.dims", "must be a nonempty array");
  for (std::size_t i = 0; i < dims.size(); ++i)
    s.dims.push_back(index_of(dims[i], "problem.dims[" + std::to_string(i) + "]"));
  const double inf = std::numeric_limits<double>::infinity();
  s.A = matrix_of(field(j, "A", path), "problem.A");
  s.q = vector_of(field(j, "q", path), "problem.q");
  s.lo = vector_of(field(j, "lo", path), "problem.lo", -inf);
  s.hi = vector_of(field(j, "hi", path), "problem.hi", inf);
  if (j.contains("shift_M")) s.shift_M = matrix_of(j.at("shift_M"), "problem.shift_M");
  if (j.contains("shift_c")) s.shift_c = vector_of(j.at("shift_c"), "problem.shift_c");
  return build_gnep(std::move(s));
}

SolverConfig solver_of(const json& j, Algorithm algo) {
  const std::string path = "solver";
  SolverConfig s;
  if (j.is_null()) {
    if (algo == Algorithm::InertialA || algo == Algorithm::InertialB || algo == Algorithm::InertialC)
      throw ConfigError("solver.theta", "theta required for " + std::string(to_string(algo)));
    if (algo == Algorithm::OdeRk4 || algo == Algorithm::OdeEuler)
      throw ConfigError("solver.dt", "dt and t_end required for " + std::string(to_string(algo)));
    return s;
  }
  require_object(j, path);
  check_keys(j, path,
             {"lambda", "h", "alpha", "beta", "gamma", "theta", "tol", "max_iters", "inner_tol",
              "inner_max", "inner_solver", "dt", "t_end"});
  s.lambda = number_or(j, "lambda", path, s.lambda);
  s.h = number_or(j, "h", path, s.h);
  s.alpha = number_or(j, "alpha", path, s.alpha);
  s.beta = number_or(j, "beta", path, s.beta);
  s.gamma = number_or(j, "gamma", path, s.gamma);
  s.tol = number_or(j, "tol", path, s.tol);
  s.inner_tol = number_or(j, "inner_tol", path, s.inner_tol);
  s.dt = number_or(j, "dt", path, s.dt);
  s.t_end = number_or(j, "t_end", path, s.t_end);
  if (j.contains("max_iters")) s.max_iters = count(j.at("max_iters"), "solver.max_iters");
  if (j.contains("inner_max")) s.inner_max = count(j.at("inner_max"), "solver.inner_max");
  if (j.contains("theta")) {
    const json& t = j.at("theta");
    if (t.is_array()) {
      const Vector v = vector_of(t, "solver.theta");
      s.theta_schedule.assign(v.data(), v.data() + v.size());
    } else {
      s.theta = number(t, "solver.theta");
    }
  }
  if (j.contains("inner_solver")) {
    const json& v = j.at("inner_solver");
    const std::string name = v.is_string() ? v.get<std::string>() : "";
    if (name == "auto")
      s.inner_solver = InnerSolver::Auto;
    else if (name == "plain")
      s.inner_solver = InnerSolver::Plain;
    else if (name == "relaxed")
      s.inner_solver = InnerSolver::Relaxed;
    else
      throw ConfigError("solver.inner_solver", "must be one of auto, plain, relaxed");
  }

  const bool inertial =
      algo == Algorithm::InertialA || algo == Algorithm::InertialB || algo == Algorithm::InertialC;
  if (inertial && !s.has_theta())
    throw ConfigError("solver.theta", "theta required for " + std::string(to_string(algo)));
  if ((algo == Algorithm::OdeRk4 || algo == Algorithm::OdeEuler) &&
      (!j.contains("dt") || !j.contains("t_end")))
    throw ConfigError(j.contains("dt") ? "solver.t_end" : "solver.dt",
                      "dt and t_end required for " + std::string(to_string(algo)));
  try {
    s.validate();
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.substr(0, msg.find(' ')), msg.substr(msg.find(' ') + 1));
  }
  return s;
}

InitConfig init_of(const json& j) {
  InitConfig init;
  if (j.is_null()) return init;
  if (j.is_array()) {
    init.kind = InitConfig::Kind::Vector;
    init.point = vector_of(j, "init");
    return init;
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "zero") return init;
    if (s == "random") {
      init.kind = InitConfig::Kind::Random;
      return init;
    }
    throw ConfigError("init", "must be \"zero\", \"random\", an array or an object");
  }
  require_object(j, "init");
  check_keys(j, "init", {"type", "scale", "point"});
  const std::string type = field(j, "type", "init").get<std::string>();
  if (type == "zero") return init;
  if (type == "random") {
    init.kind = InitConfig::Kind::Random;
    init.scale = number_or(j, "scale", "init", 1.0);
    if (!(init.scale > 0.0)) throw ConfigError("init.scale", "must be > 0");
    return init;
  }
  if (type == "vector") {
    init.kind = InitConfig::Kind::Vector;
    init.point = vector_of(field(j, "point", "init"), "init.point");
    return init;
  }
  throw ConfigError("init.type", "unknown init type '" + type + "'");
}

OutputConfig output_of(const json& j) {
  OutputConfig out;
  if (j.is_null()) return out;
  require_object(j, "output");
  check_keys(j, "output", {"trace_path", "format"});
  if (j.contains("trace_path")) {
    if (!j.at("trace_path").is_string()) throw ConfigError("output.trace_path", "must be a string");
    out.trace_path = j.at("trace_path").get<std::string>();
  }
  if (j.contains("format")) {
    const json& f = j.at("format");
    const std::string name = f.is_string() ? f.get<std::string>() : "";
    if (name == "csv")
      out.format = TraceFormat::Csv;
    else if (name == "json")
      out.format = TraceFormat::Json;
    else
      throw ConfigError("output.format", "must be csv or json");
  }
  return out;
}

const json& null_json() {
  static const json n;
  return n;
}

const json& member(const json& doc, const char* key) {
  return doc.contains(key) ? doc.at(key) : null_json();
}

}  // namespace

const char* to_string(Algorithm a) {
  for (const auto& [algo, name] : kAlgorithms)
    if (algo == a) return name;
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (const auto& [algo, n] : kAlgorithms)
    if (name == n) return algo;
  throw ConfigError("algorithm", "unknown algorithm '" + name + "'");
}

json read_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "invalid JSON in '" + path + "': " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--override", "expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream segments(key);
  std::string seg;
  std::vector<std::string> parts;
  while (std::getline(segments, seg, '.')) {
    if (seg.empty()) throw ConfigError(key, "empty path segment in override");
    parts.push_back(seg);
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      const bool numeric = parts[i].find_first_not_of("0123456789") == std::string::npos;
      if (!numeric || std::stoul(parts[i]) >= node->size())
        throw ConfigError(key, "array index out of range in override");
      node = &(*node)[std::stoul(parts[i])];
    } else {
      if (!node->is_object()) *node = json::object();
      node = &(*node)[parts[i]];
    }
    if (last) *node = value;
  }
}

namespace {

ExperimentConfig parse_config_unchecked(const json& doc) {
  require_object(doc, "config");
  check_keys(doc, "", {"problem", "algorithm", "solver", "seed", "init", "output"});
  ExperimentConfig cfg;

  const json& problem = field(doc, "problem", "");
  if (problem.is_string()) {
    cfg.problem = json{{"type", problem.get<std::string>()}};
  } else {
    require_object(problem, "problem");
    cfg.problem = problem;
  }
  const json& type = field(cfg.problem, "type", "problem");
  if (!type.is_string()) throw ConfigError("problem.type", "must be a string");
  cfg.problem_type = type.get<std::string>();
  if (cfg.problem_type != "toy1d" && cfg.problem_type != "obstacle" && cfg.problem_type != "gnep" &&
      cfg.problem_type != "custom")
    throw ConfigError("problem.type", "unknown problem '" + cfg.problem_type + "'");
  if (cfg.problem_type == "toy1d") check_keys(cfg.problem, "problem", {"type"});

  const json& algo = field(doc, "algorithm", "");
  if (!algo.is_string()) throw ConfigError("algorithm", "must be a string");
  cfg.algorithm = parse_algorithm(algo.get<std::string>());
  cfg.solver = solver_of(member(doc, "solver"), cfg.algorithm);
  if (doc.contains("seed")) cfg.seed = count(doc.at("seed"), "seed");
  cfg.init = init_of(member(doc, "init"));
  cfg.output = output_of(member(doc, "output"));
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  try {
    return parse_config_unchecked(doc);
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("schema violation: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = read_config_json(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

BuiltProblem build_problem(const ExperimentConfig& cfg) {
  BuiltProblem out;
  try {
    if (cfg.problem_type == "toy1d") {
      out.problem = std::make_shared<const QviProblem>(build_toy_1d());
    } else if (cfg.problem_type == "obstacle") {
      out.problem = std::make_shared<const QviProblem>(obstacle_problem(cfg.problem).problem);
    } else if (cfg.problem_type == "gnep") {
      auto game = std::make_shared<const GnepGame>(gnep_game(cfg.problem));
      out.problem = std::shared_ptr<const QviProblem>(game, &game->problem());
      out.game = std::move(game);
    } else if (cfg.problem_type == "custom") {
      out.problem = std::make_shared<const QviProblem>(custom_problem(cfg.problem));
    } else {
      throw ConfigError("problem.type", "unknown problem '" + cfg.problem_type + "'");
    }
  } catch (const InvalidInput& e) {
    throw ConfigError("problem", e.what());
  } catch (const DimensionMismatch& e) {
    throw ConfigError("problem", e.what());
  } catch (const json::exception& e) {
    throw ConfigError("problem", e.what());
  }
  return out;
}

Vector initial_point(const ExperimentConfig& cfg, Index dim) {
  switch (cfg.init.kind) {
    case InitConfig::Kind::Zero:
      return Vector::Zero(dim);
    case InitConfig::Kind::Vector:
      if (cfg.init.point.size() != dim)
        throw ConfigError("init", "expected " + std::to_string(dim) + " entries, got " +
                                      std::to_string(cfg.init.point.size()));
      return cfg.init.point;
    case InitConfig::Kind::Random:
      break;
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, cfg.init.scale);
  Vector x(dim);
  for (Index i = 0; i < dim; ++i) x(i) = gauss(rng);
  return x;
}

std::string RunOutcome::summary() const {
  char buf[256];
  const char* status = exit_code == kConverged        ? "converged"
                       : exit_code == kNotConverged   ? "max_iters"
                       : exit_code == kConfigError    ? "config_error"
                                                      : "failed";
  std::snprintf(buf, sizeof buf, "status=%s residual=%.6e iterations=%zu converged=%s wall=%.3fs",
                status, final_residual, iterations, converged ? "true" : "false", wall_seconds);
  std::string out = buf;
  if (!error.empty()) out += " error=\"" + error + "\"";
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  auto stop_clock = [&] {
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  BuiltProblem built;
  Vector x0;
  try {
    built = build_problem(cfg);
    x0 = initial_point(cfg, built.problem->dim());
  } catch (const ConfigError& e) {
    out.exit_code = kConfigError;
    out.error = e.what();
    stop_clock();
    return out;
  } catch (const Error& e) {
    out.exit_code = kRuntimeFailure;
    out.error = e.what();
    stop_clock();
    return out;
  }
  const QviProblem& p = *built.problem;
  const SolverConfig& s = cfg.solver;

  try {
    const Seeds seeds = Seeds::constant(x0);
    std::optional<IterationResult> res;
    switch (cfg.algorithm) {
      case Algorithm::GradProj:
        res = gradient_projection(p, s, x0);
        break;
      case Algorithm::Alg1:
        res = algorithm1_implicit(p, s, seeds);
        break;
      case Algorithm::Alg2:
        res = algorithm2_implicit(p, s, seeds);
        break;
      case Algorithm::Explicit:
        res = explicit_scheme(p, s, seeds);
        break;
      case Algorithm::ShortExplicit:
        res = short_explicit(p, s, seeds);
        break;
      case Algorithm::InertialA:
        res = two_step_inertial(p, s, seeds, InertialVariant::A);
        break;
      case Algorithm::InertialB:
        res = two_step_inertial(p, s, seeds, InertialVariant::B);
        break;
      case Algorithm::InertialC:
        res = two_step_inertial(p, s, seeds, InertialVariant::C);
        break;
      case Algorithm::OdeRk4:
      case Algorithm::OdeEuler: {
        const Integrator method = cfg.algorithm == Algorithm::OdeRk4 ? Integrator::RK4 : Integrator::Euler;
        const Trajectory traj = integrate(p, s, DynState::at_rest(x0), method);
        out.trace = trajectory_trace(p, s, traj);
        out.iterations = traj.size() - 1;
        out.final_residual = out.trace.back().residual;
        out.converged = out.final_residual <= s.tol;
        break;
      }
    }
    if (res) {
      out.trace = std::move(res->trace);
      out.iterations = res->iterations;
      out.converged = res->converged;
      out.final_residual = out.trace.back().residual;
      out.warnings = std::move(res->warnings);
    }
    if (!cfg.output.trace_path.empty()) write_trace(out.trace, cfg.output.trace_path, cfg.output.format);
    out.exit_code = out.converged ? kConverged : kNotConverged;
  } catch (const Error& e) {
    out.exit_code = kRuntimeFailure;
    out.error = e.what();
  }
  stop_clock();
  return out;
}

}  // namespace qvi::cli
