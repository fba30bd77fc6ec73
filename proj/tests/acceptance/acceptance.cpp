// Acceptance suite. Prints one PASS/FAIL line per criterion; the exit status
// is the number of failed criteria. `--only N` runs a single criterion.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qvi/analysis.hpp"
#include "qvi/cli/experiment.hpp"
#include "qvi/discrete_algorithms.hpp"
#include "qvi/dynamics.hpp"
#include "qvi/problems.hpp"
#include "qvi/projections.hpp"

using namespace qvi;
namespace fs = std::filesystem;

namespace {

// Thresholds.
constexpr int kProjectionTriples = 1000;
constexpr double kIdempotenceTol = 1e-12;
constexpr double kVariationalTol = 1e-9;
constexpr double kProjectionSeconds = 10.0;
constexpr int kAnchorTriples = 1000;
constexpr int kVasilievOperators = 20;
constexpr std::size_t kVasilievPairs = 1000;
constexpr double kVasilievTol = 1e-9;
constexpr double kToyTol = 1e-6;
constexpr std::size_t kToyMaxIters = 5000;
constexpr double kToySeconds = 1.0;
constexpr double kEnvelopeMinR2 = 0.9;
constexpr double kObstacleMatchTol = 1e-6;
constexpr double kComplementarityTol = 1e-8;
constexpr double kObstacleSeconds = 30.0;
constexpr double kGapTol = 1e-6;
constexpr double kRhsTol = 1e-8;
constexpr std::size_t kPreservationSteps = 100;
// Rounding allowance for inequalities that hold with equality in exact arithmetic.
constexpr double kRounding = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Vector gaussian(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

// Random instance of one base-set family.
BaseSet random_set(int family, Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 3.0);
  switch (family) {
    case 0: {
      Vector lo = gaussian(n, rng), hi = lo;
      for (Index i = 0; i < n; ++i) hi(i) += u(rng);
      return Box{lo, hi};
    }
    case 1:
      return Ball{gaussian(n, rng), u(rng)};
    case 2:
      return Halfspace{gaussian(n, rng) + Vector::Constant(n, 0.1), gaussian(1, rng)(0)};
    case 3:
      return Simplex{n, u(rng)};
    case 4:
      return NonnegOrthant{n};
    default:
      return WholeSpace{n};
  }
}

const char* kFamilies[] = {"box", "ball", "halfspace", "simplex", "orthant", "whole"};

// ---------------------------------------------------------------------------

Outcome projection_laws() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<int> dim(1, 10);
  double worst_idem = 0.0, worst_nonexp = 0.0, worst_firm = 0.0, worst_var = -INFINITY;
  std::string failing;
  for (int family = 0; family < 6; ++family) {
    bool ok = true;
    for (int t = 0; t < kProjectionTriples; ++t) {
      const Index n = dim(rng);
      const BaseSet set = random_set(family, n, rng);
      const Vector x = gaussian(n, rng, 3.0), y = gaussian(n, rng, 3.0);
      const Vector px = project_base(set, x), py = project_base(set, y);
      const double idem = (project_base(set, px) - px).norm();
      const double scale = 1.0 + (x - y).squaredNorm();
      const double nonexp = (px - py).norm() - (x - y).norm();
      const double firm = (px - py).squaredNorm() -
                          ((x - y).squaredNorm() - ((x - px) - (y - py)).squaredNorm());
      const MovingSet fixed(set, ShiftMap::zero(n));
      const double var = verify_variational_characterization(fixed, Vector::Zero(n), x, 1,
                                                              static_cast<std::uint64_t>(t))
                             .max_violation;
      worst_idem = std::max(worst_idem, idem);
      worst_nonexp = std::max(worst_nonexp, nonexp);
      worst_firm = std::max(worst_firm, firm / scale);
      worst_var = std::max(worst_var, var);
      ok = ok && idem <= kIdempotenceTol && nonexp <= kRounding * std::sqrt(scale) &&
           firm <= kRounding * scale && var <= kVariationalTol;
    }
    if (!ok) failing += std::string(" ") + kFamilies[family];
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = failing.empty() && secs < kProjectionSeconds;
  o.detail = "6 families x " + std::to_string(kProjectionTriples) + " triples; idempotence " +
             fmt("%.1e", worst_idem) + ", nonexpansive excess " + fmt("%.1e", worst_nonexp) +
             ", firm excess " + fmt("%.1e", worst_firm) + ", variational " + fmt("%.1e", worst_var) +
             ", " + fmt("%.2f", secs) + " s" + (failing.empty() ? "" : "; failing:" + failing);
  return o;
}

Outcome anchor_bound() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim(1, 8), family(0, 5);
  int violations = 0, total = 0;
  double worst_ratio = 0.0;
  for (double l : {0.0, 0.25, 1.0}) {
    for (int t = 0; t < kAnchorTriples; ++t) {
      const Index n = dim(rng);
      ShiftMap shift = ShiftMap::zero(n);
      if (l > 0.0) {
        // Alternate general affine shifts of norm l with the min-broadcast map
        // (l = sqrt(n) = 1 in one dimension).
        if (l == 1.0 && t % 2 == 1) {
          shift = ShiftMap::min_broadcast(1, gaussian(1, rng)(0));
        } else {
          Matrix G = Matrix::Zero(n, n);
          for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) G(i, j) = gaussian(1, rng)(0);
          G *= l / spectral_norm(G);
          shift = ShiftMap::affine(G, gaussian(n, rng), l);
        }
      }
      const Index m = shift.dim();
      const MovingSet set(random_set(family(rng), m, rng), shift);
      const Vector x = gaussian(m, rng, 2.0), y = gaussian(m, rng, 2.0), u = gaussian(m, rng, 3.0);
      const double lhs = (project_moving(set, x, u) - project_moving(set, y, u)).norm();
      const double bound = 2.0 * shift.lipschitz() * (x - y).norm();
      if (lhs > bound + kRounding) ++violations;
      if (bound > 0.0) worst_ratio = std::max(worst_ratio, lhs / bound);
      ++total;
    }
  }
  return {violations == 0, std::to_string(total) + " triples over l in {0, 0.25, 1}; violations " +
                               std::to_string(violations) + ", max ratio to 2l|x-y| " +
                               fmt("%.4f", worst_ratio)};
}

Outcome vasiliev() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> mu_dist(0.1, 2.0), spread(1.0, 10.0);
  double worst = -INFINITY;
  for (int k = 0; k < kVasilievOperators; ++k) {
    const int n = dim(rng);
    const double mu = mu_dist(rng);
    const double lip = n == 1 ? mu : mu * spread(rng);
    const Matrix A = oracle::random_spd(n, mu, lip, rng);
    const auto op = OperatorSpec::affine(A, gaussian(n, rng), mu, lip);
    worst = std::max(worst, check_vasiliev(op, kVasilievPairs, static_cast<std::uint64_t>(k)).max_defect);
  }
  return {worst <= kVasilievTol, std::to_string(kVasilievOperators) + " operators x " +
                                     std::to_string(kVasilievPairs) + " pairs; max defect " +
                                     fmt("%.2e", worst)};
}

Outcome toy_ground_truth() {
  const QviProblem toy = build_toy_1d();
  const double star = 4.0 / 3.0;
  const auto grid = oracle::toy_grid_search(0.5, 0.0, 3.0, 1e-6);
  SolverConfig cfg;
  cfg.lambda = 0.5;
  cfg.max_iters = kToyMaxIters;
  const Vector x0 = Vector::Zero(1);
  struct Run {
    const char* name;
    std::function<IterationResult()> go;
  };
  const std::array<Run, 4> runs = {{
      {"grad_proj", [&] { return gradient_projection(toy, cfg, x0); }},
      {"alg1", [&] { return algorithm1_implicit(toy, cfg, Seeds::constant(x0)); }},
      {"alg2", [&] { return algorithm2_implicit(toy, cfg, Seeds::constant(x0)); }},
      {"short_explicit", [&] { return short_explicit(toy, cfg, Seeds::constant(x0)); }},
  }};
  bool ok = std::abs(grid.x - star) <= kToyTol;
  std::string detail = "grid argmin " + fmt("%.7f", grid.x) + ";";
  for (const auto& r : runs) {
    const auto t0 = Clock::now();
    bool run_ok = false;
    std::string note;
    try {
      const auto res = r.go();
      const double secs = seconds_since(t0);
      const double err = std::abs(res.x_final(0) - star);
      run_ok = res.converged && err <= kToyTol && res.iterations <= kToyMaxIters && secs < kToySeconds;
      note = fmt("%.1e", err) + "/" + std::to_string(res.iterations) + "it";
    } catch (const Error& e) {
      note = std::string("error: ") + e.what();
    }
    ok = ok && run_ok;
    detail += std::string(" ") + r.name + " " + note;
  }
  return {ok, detail};
}

Outcome continuous_envelope() {
  const QviProblem toy = build_toy_1d();
  SolverConfig cfg;
  cfg.alpha = cfg.beta = cfg.gamma = 1.0;
  cfg.lambda = 0.5;
  cfg.dt = 1e-3;
  cfg.t_end = 40.0;
  const Trajectory traj = integrate(toy, cfg, DynState::at_rest(Vector::Zero(1)), Integrator::RK4);
  const Vector& star = *toy.x_ref;
  const double t_skip = default_t_skip(cfg);
  const auto outcome = fit_decay_rate(traj, star, t_skip);
  double r2 = 1.0, eta = 0.0;
  if (const auto* fit = std::get_if<DecayFit>(&outcome)) {
    r2 = fit->r_squared;
    eta = fit->eta_hat;
  }

  const double rate = cfg.beta / cfg.alpha;
  const double d0 = (traj.states.front().x - star).squaredNorm();
  std::size_t first = 0;
  while (traj.times[first] < t_skip) ++first;
  const double c = (traj.states[first].x - star).squaredNorm() / (d0 * std::exp(-rate * traj.times[first]));
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t i = first; i < traj.size(); ++i) {
    const double d2 = (traj.states[i].x - star).squaredNorm();
    const double env = c * d0 * std::exp(-rate * traj.times[i]);
    if (d2 > env * (1.0 + kRounding)) ++violations;
    if (env > 0.0) worst = std::max(worst, d2 / env);
  }
  const bool pass = violations == 0 && r2 >= kEnvelopeMinR2;
  return {pass, "fit eta " + fmt("%.4f", eta) + " (envelope rate/2 = " + fmt("%.2f", rate / 2) +
                    "), r^2 " + fmt("%.3f", r2) + ", C " + fmt("%.3f", c) + ", envelope violations " +
                    std::to_string(violations) + "/" + std::to_string(traj.size() - first) +
                    ", max d^2/envelope " + fmt("%.3g", worst)};
}

Outcome descent_inequality() {
  const QviProblem toy = build_toy_1d();
  const Vector& star = *toy.x_ref;
  SolverConfig cfg;
  cfg.alpha = 0.5;
  const auto run = algorithm1_implicit(toy, cfg, Seeds::constant(Vector::Zero(1)), {true});
  std::size_t steps = 0, held = 0;
  for (std::size_t k = 4; k < run.iterates.size(); ++k, ++steps) {
    const auto rep = check_descent_inequality(
        toy, cfg, {run.iterates[k - 4], run.iterates[k - 3], run.iterates[k - 2], run.iterates[k - 1], run.iterates[k]},
        star);
    held += rep.holds ? 1 : 0;
  }

  const auto at_star = algorithm1_implicit(toy, cfg, Seeds::constant(star), {true});
  bool equality = true;
  for (std::size_t k = 4; k < at_star.iterates.size(); ++k) {
    const auto rep = check_descent_inequality(
        toy, cfg, {at_star.iterates[k - 4], at_star.iterates[k - 3], at_star.iterates[k - 2], at_star.iterates[k - 1], at_star.iterates[k]},
        star);
    equality = equality && rep.holds && rep.lhs == rep.rhs;
  }
  const auto direct = check_descent_inequality(toy, cfg, {star, star, star, star, star}, star);
  equality = equality && direct.lhs == 0.0 && direct.rhs == 0.0 && direct.holds;

  // Reference point: the default alpha = 1 run, where the first step projects
  // onto a set that excludes x*.
  SolverConfig def;
  const auto run1 = algorithm1_implicit(toy, def, Seeds::constant(Vector::Zero(1)), {true});
  std::size_t fails1 = 0, fails1_outside = 0;
  for (std::size_t k = 4; k < run1.iterates.size(); ++k) {
    const auto rep = check_descent_inequality(
        toy, def, {run1.iterates[k - 4], run1.iterates[k - 3], run1.iterates[k - 2], run1.iterates[k - 1], run1.iterates[k]},
        star);
    if (!rep.holds) {
      ++fails1;
      if (!rep.star_in_step_set) ++fails1_outside;
    }
  }

  const bool pass = run.converged && steps > 0 && held == steps && equality;
  return {pass, "alpha=0.5,beta=gamma=h=1: holds at " + std::to_string(held) + "/" + std::to_string(steps) +
                    " steps; equality at x*: " + (equality ? "yes" : "no") +
                    "; (alpha=1 run: " + std::to_string(fails1) + " failing step(s), " +
                    std::to_string(fails1_outside) + " with x* outside K(x_n))"};
}

Vector ramp_load(Index n) {
  Vector f(n);
  for (Index i = 0; i < n; ++i) f(i) = 10.0 * ((i + 1.0) / (n + 1.0) - 0.5);
  return f;
}

Outcome obstacle() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  struct Load {
    const char* name;
    std::function<Vector(Index)> make;
  };
  const Load loads[] = {{"f=-1", [](Index n) { return Vector(Vector::Constant(n, -1.0)); }},
                        {"ramp", ramp_load}};
  for (const Load& load : loads) {
    detail += std::string(load.name) + ":";
    for (Index n : {5, 10, 20}) {
      const ObstacleProblem prob = build_obstacle(n, load.make(n), 0.0);
      const Vector& ref = *prob.problem.x_ref;
      const auto comp = check_obstacle_complementarity(prob, ref, kComplementarityTol);
      SolverConfig cfg;
      cfg.lambda = 1.0 / prob.problem.op.lip();
      cfg.tol = 1e-12;
      cfg.max_iters = 1000000;
      const auto res = gradient_projection(prob.problem, cfg, Vector::Zero(n));
      const double err = (res.x_final - ref).cwiseAbs().maxCoeff();
      ok = ok && res.converged && err <= kObstacleMatchTol && comp.passes;
      const long active = (ref.array() <= ref.minCoeff() + 1e-12).count();
      detail += " n=" + std::to_string(n) + " err " + fmt("%.1e", err) + " comp " +
                (comp.passes ? "ok" : "FAIL") + " contact " + std::to_string(active) + " (" +
                std::to_string(res.iterations) + " it);";
    }
    detail += " ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kObstacleSeconds;
  return {ok, detail + fmt("%.2f", secs) + " s"};
}

GnepGame coupled_game() {
  GnepSpec s;
  s.dims = {1, 1};
  s.A = Matrix::Ones(2, 2);
  s.q = -Vector::Ones(2);
  s.lo = Vector::Zero(2);
  s.hi = Vector::Constant(2, 10.0);
  s.shift_M = Matrix::Zero(2, 2);
  s.shift_M(0, 1) = s.shift_M(1, 0) = 0.1;
  return build_gnep(s);
}

Outcome gnep() {
  const GnepGame game = coupled_game();
  const QviProblem& p = game.problem();
  SolverConfig cfg;
  cfg.lambda = 0.5;
  cfg.tol = 1e-12;
  const Vector x0 = project_moving(p.set, Vector::Zero(2), Vector::Zero(2));
  const auto res = gradient_projection(p, cfg, x0);
  const auto br = gnep_best_response_check(game, res.x_final, kGapTol);
  const double rhs = gnep_projected_dynamics_rhs(game, res.x_final, cfg.lambda).norm();
  const bool pass = res.converged && br.is_equilibrium && rhs <= kRhsTol;
  return {pass, "solution (" + fmt("%.6f", res.x_final(0)) + ", " + fmt("%.6f", res.x_final(1)) +
                    "), gap " + fmt("%.1e", br.worst_player_gap) + ", |rhs| " + fmt("%.1e", rhs)};
}

Outcome fixed_point_preservation() {
  struct Case {
    std::string name;
    QviProblem problem;
    Vector star;
    double lambda;
  };
  const ObstacleProblem obs = build_obstacle(10, ramp_load(10), 0.0);
  const GnepGame game = coupled_game();
  std::vector<Case> cases;
  cases.push_back({"toy", build_toy_1d(), Vector::Constant(1, 4.0 / 3.0), 0.5});
  cases.push_back({"obstacle", obs.problem, *obs.problem.x_ref, 1.0 / obs.problem.op.lip()});
  cases.push_back({"gnep", game.problem(), *game.problem().x_ref, 0.5});

  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    SolverConfig cfg;
    cfg.lambda = c.lambda;
    cfg.tol = 0.0;
    cfg.max_iters = kPreservationSteps;
    const double limit = 10.0 * cfg.inner_tol;
    const double res0 = fixed_point_residual(c.problem, c.star, cfg.lambda);
    const Seeds seeds = Seeds::constant(c.star);
    const std::array<std::pair<const char*, std::function<IterationResult()>>, 4> runs = {{
        {"gp", [&] { return gradient_projection(c.problem, cfg, c.star, {true}); }},
        {"alg1", [&] { return algorithm1_implicit(c.problem, cfg, seeds, {true}); }},
        {"alg2", [&] { return algorithm2_implicit(c.problem, cfg, seeds, {true}); }},
        {"short", [&] { return short_explicit(c.problem, cfg, seeds, {true}); }},
    }};
    double worst = 0.0;
    bool case_ok = res0 <= 1e-12;
    for (const auto& [name, go] : runs) {
      try {
        const auto r = go();
        double dev = 0.0;
        for (const Vector& x : r.iterates) dev = std::max(dev, (x - c.star).norm());
        worst = std::max(worst, dev);
        case_ok = case_ok && r.iterations == kPreservationSteps && dev <= limit;
      } catch (const Error& e) {
        case_ok = false;
        detail += c.name + "/" + name + " error: " + e.what() + "; ";
      }
    }
    ok = ok && case_ok;
    detail += c.name + " max drift " + fmt("%.1e", worst) + " (seed residual " + fmt("%.0e", res0) + "); ";
  }
  return {ok, detail + "limit 10*inner_tol = 1e-11"};
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(QVI_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("qvi_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const nlohmann::json problems[] = {
      {{"type", "toy1d"}},
      {{"type", "obstacle"}, {"n", 10}, {"f", -1.0}, {"k_offset", 0.0}},
  };
  const double lambdas[] = {0.5, 0.0025};
  bool ok = true;
  int cases = 0;
  std::string detail;
  for (int pi = 0; pi < 2; ++pi) {
    struct Variant {
      const char* name;
      int expected;
      std::function<void(nlohmann::json&)> edit;
    };
    const Variant variants[] = {
        {"converged", 0, [](nlohmann::json&) {}},
        {"capped", 2, [](nlohmann::json& d) { d["solver"]["max_iters"] = 3; }},
        {"bad-config", 3, [](nlohmann::json& d) { d["solver"]["lambda"] = -1.0; }},
    };
    for (const auto& v : variants) {
      nlohmann::json doc = {{"problem", problems[pi]},
                            {"algorithm", "grad_proj"},
                            {"seed", 7},
                            {"init", {{"type", "random"}, {"scale", 2.0}}},
                            {"solver", {{"lambda", lambdas[pi]}, {"tol", 1e-9}, {"max_iters", 200000}}}};
      v.edit(doc);
      const std::string stem = "p" + std::to_string(pi) + "_" + v.name;
      const fs::path cfg = dir / (stem + ".json");
      doc["output"] = {{"trace_path", (dir / (stem + "_a.csv")).string()}};
      std::ofstream(cfg) << doc.dump(2);
      const int rc1 = run_tool("solve --quiet --config " + cfg.string());
      const int rc2 = run_tool("solve --quiet --config " + cfg.string() + " --override output.trace_path=" +
                               (dir / (stem + "_b.csv")).string());
      bool same = true;
      if (v.expected != 3) {
        const std::string a = slurp(dir / (stem + "_a.csv")), b = slurp(dir / (stem + "_b.csv"));
        same = !a.empty() && a == b;
      }
      const bool case_ok = rc1 == v.expected && rc2 == v.expected && same;
      ok = ok && case_ok;
      ++cases;
      detail += stem + "=" + std::to_string(rc1) + (same ? "" : "(traces differ)") + " ";
    }
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {ok, std::to_string(cases) + " cases: " + detail};
}

struct Criterion {
  const char* title;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"projection laws", projection_laws},
    {"moving-set anchor bound", anchor_bound},
    {"strongly monotone Lipschitz inequality", vasiliev},
    {"one-dimensional ground truth", toy_ground_truth},
    {"continuous-time decay envelope", continuous_envelope},
    {"implicit-scheme descent inequality", descent_inequality},
    {"obstacle problem vs PSOR", obstacle},
    {"coupled GNEP equilibrium", gnep},
    {"fixed-point preservation", fixed_point_preservation},
    {"CLI determinism and exit codes", cli_determinism},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  int failed = 0;
  for (int k = 1; k <= 10; ++k) {
    if (only != 0 && k != only) continue;
    const Criterion& c = kCriteria[k - 1];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", k, c.title, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed;
}
