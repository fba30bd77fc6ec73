#include "qvi/discrete_algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "qvi/analysis.hpp"
#include "qvi/projections.hpp"

namespace qvi {

namespace {

struct History {
  Vector xm2;  // x_{n-2}
  Vector xm1;  // x_{n-1}
  Vector xn;   // x_n
  Vector xp1;  // x_{n+1}
};

using StepFn = std::function<Vector(const History&, std::size_t n, IterationResult&)>;

void check_divergence(const Vector& x, std::size_t n) {
  const double norm = x.norm();
  if (!std::isfinite(norm) || norm > kBlowUpNorm) {
    std::ostringstream msg;
    msg << "iterates diverged at iteration " << n << " (norm " << norm << ")";
    throw DivergenceError(msg.str());
  }
}

class TraceRecorder {
 public:
  TraceRecorder(const QviProblem& p, const SolverConfig& cfg, IterationResult& out)
      : p_(p), cfg_(cfg), out_(out) {}

  /// Appends a row and returns whether the residual is within tolerance.
  bool record(std::size_t k, const Vector& x, double step_norm) {
    const double res = fixed_point_residual(p_, x, cfg_.lambda);
    const double dist = p_.x_ref ? (x - *p_.x_ref).norm() : -1.0;
    out_.trace.push(static_cast<double>(k), res, dist, step_norm);
    return res <= cfg_.tol;
  }

  [[nodiscard]] bool stop() const { return out_.converged && cfg_.tol > 0.0; }

 private:
  const QviProblem& p_;
  const SolverConfig& cfg_;
  IterationResult& out_;
};

void check_inputs(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds) {
  cfg.validate();
  for (const Vector* s : {&seeds.x0, &seeds.x1, &seeds.x2}) {
    require_dim(*s, p.dim(), "seed");
    require_finite(*s, "seed");
  }
}

Vector projected_step(const QviProblem& p, double lambda, const Vector& x) {
  return project_moving(p.set, x, x - lambda * apply_operator(p.op, x));
}

IterationResult run_multistep(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds,
                              const RunOptions& opts, IterationResult out, const StepFn& step) {
  check_inputs(p, cfg, seeds);
  History h{seeds.x0, seeds.x1, seeds.x2, projected_step(p, cfg.lambda, seeds.x2)};
  check_divergence(h.xp1, 0);
  if (opts.record_iterates) out.iterates = {h.xm2, h.xm1, h.xn, h.xp1};

  TraceRecorder rec(p, cfg, out);
  out.converged = rec.record(0, h.xp1, 0.0);
  for (std::size_t n = 0; n < cfg.max_iters && !rec.stop(); ++n) {
    Vector next = step(h, n, out);
    check_divergence(next, n + 1);
    const double step_norm = (next - h.xp1).norm();
    h = History{std::move(h.xm1), std::move(h.xn), std::move(h.xp1), std::move(next)};
    if (opts.record_iterates) out.iterates.push_back(h.xp1);
    out.iterations = n + 1;
    out.converged = rec.record(n + 1, h.xp1, step_norm);
  }
  out.x_final = h.xp1;
  return out;
}

// Solves w = P_{K(anchor)}(c - implicit_lambda T(w) - a w) for the implicit
// schemes. The relaxed map w <- P(w - rho G(w)), G(w) = w - c + F(w), has the
// same fixed points; with F strongly monotone (modulus a + lambda mu) and
// Lipschitz (a + lambda L) the choice rho = m / Lg^2 makes it a contraction.
struct InnerSolve {
  const QviProblem& p;
  const SolverConfig& cfg;
  InnerSolver method;
  double a;                // alpha / (2 h^3)
  double implicit_lambda;  // lambda for the central scheme, 0 for the forward scheme
  double contraction;
  const char* contraction_formula;

  Vector operator()(const Vector& anchor, const Vector& c, Vector w, std::size_t n,
                    IterationResult& out) const {
    const double m = 1.0 + a + implicit_lambda * p.op.mu();
    const double lg = 1.0 + a + implicit_lambda * p.op.lip();
    const double rho = m / (lg * lg);
    const Vector shift = apply_shift(p.set.shift(), anchor);
    auto F = [&](const Vector& v) -> Vector {
      Vector f = a * v;
      if (implicit_lambda != 0.0) f += implicit_lambda * apply_operator(p.op, v);
      return f;
    };
    for (std::size_t it = 1; it <= cfg.inner_max; ++it) {
      Vector arg = method == InnerSolver::Relaxed ? Vector(w - rho * (w - c + F(w))) : Vector(c - F(w));
      Vector w_new = shift + project_base(p.set.base(), arg - shift);
      const double change = (w_new - w).norm();
      w = std::move(w_new);
      out.inner_iterations_total += 1;
      if (!std::isfinite(change) || w.norm() > kBlowUpNorm) {
        std::ostringstream msg;
        msg << "inner iterate diverged at outer iteration " << n << " (norm " << w.norm() << ")";
        throw DivergenceError(msg.str());
      }
      if (change <= cfg.inner_tol * std::max(1.0, w.norm())) return w;
    }
    std::ostringstream msg;
    msg << "inner " << to_string(method) << " iteration did not converge within " << cfg.inner_max
        << " steps at outer iteration " << n << "; contraction estimate " << contraction_formula << " = "
        << contraction << (contraction >= 1.0 ? " (>= 1, not a contraction)" : "");
    throw InnerSolverError(msg.str());
  }
};

InnerSolver choose_inner(const SolverConfig& cfg, double contraction, IterationResult& out) {
  InnerSolver method = cfg.inner_solver;
  if (contraction >= 1.0) {
    std::ostringstream msg;
    msg << "inner contraction estimate " << contraction << " >= 1";
    if (method == InnerSolver::Auto) msg << "; switching to the relaxed inner iteration";
    out.warnings.push_back(msg.str());
  }
  if (method == InnerSolver::Auto)
    method = contraction < 1.0 ? InnerSolver::Plain : InnerSolver::Relaxed;
  out.contraction_estimate = contraction;
  out.inner_solver_used = method;
  return method;
}

void require_implicit_coefficients(const SolverConfig& cfg) {
  if (!(cfg.alpha > 0.0) || !(cfg.beta > 0.0) || !(cfg.gamma > 0.0))
    throw InvalidInput("implicit schemes need alpha, beta, gamma > 0");
}

void note_consistency(const QviProblem& p, const SolverConfig& cfg, IterationResult& out,
                      const char* scheme) {
  if (out.converged) return;
  std::ostringstream msg;
  msg << scheme << ": stopped with residual " << fixed_point_residual(p, out.x_final, cfg.lambda)
      << "; fixed points of this recurrence need not solve the QVI";
  out.warnings.push_back(msg.str());
}

}  // namespace

const char* to_string(InertialVariant v) {
  switch (v) {
    case InertialVariant::A:
      return "A";
    case InertialVariant::B:
      return "B";
    case InertialVariant::C:
      return "C";
  }
  return "?";
}

IterationResult gradient_projection(const QviProblem& p, const SolverConfig& cfg, const Vector& x0,
                                    const RunOptions& opts) {
  cfg.validate();
  require_dim(x0, p.dim(), "gradient_projection start");
  require_finite(x0, "gradient_projection start");
  IterationResult out;
  TraceRecorder rec(p, cfg, out);
  Vector x = x0;
  if (opts.record_iterates) out.iterates.push_back(x);
  out.converged = rec.record(0, x, 0.0);
  for (std::size_t n = 0; n < cfg.max_iters && !rec.stop(); ++n) {
    Vector next = projected_step(p, cfg.lambda, x);
    check_divergence(next, n + 1);
    const double step_norm = (next - x).norm();
    x = std::move(next);
    if (opts.record_iterates) out.iterates.push_back(x);
    out.iterations = n + 1;
    out.converged = rec.record(n + 1, x, step_norm);
  }
  out.x_final = x;
  return out;
}

double central_implicit_contraction(const OperatorSpec& op, const SolverConfig& cfg) {
  return cfg.lambda * op.lip() + cfg.alpha / (2.0 * cfg.h * cfg.h * cfg.h);
}

double forward_implicit_contraction(const SolverConfig& cfg) {
  return cfg.alpha / (2.0 * cfg.h * cfg.h * cfg.h);
}

IterationResult algorithm1_implicit(const QviProblem& p, const SolverConfig& cfg,
                                    const Seeds& seeds, const RunOptions& opts) {
  cfg.validate();
  require_implicit_coefficients(cfg);
  IterationResult out;
  const double q = central_implicit_contraction(p.op, cfg);
  const InnerSolve inner{p, cfg, choose_inner(cfg, q, out), cfg.alpha / (2.0 * cfg.h * cfg.h * cfg.h),
                         cfg.lambda, q, "lambda*lip + alpha/(2h^3)"};
  const double al = cfg.alpha, bh = cfg.beta * cfg.h, gh2 = cfg.gamma * cfg.h * cfg.h;
  const double h3x2 = 2.0 * cfg.h * cfg.h * cfg.h;
  return run_multistep(p, cfg, seeds, opts, std::move(out),
                       [&](const History& h, std::size_t n, IterationResult& res) {
                         const Vector known = -2.0 * (al - bh) * h.xp1 - 2.0 * (2.0 * bh - gh2) * h.xn +
                                              2.0 * (al + bh - gh2) * h.xm1 - al * h.xm2;
                         const Vector c = h.xn - known / h3x2;
                         return inner(h.xn, c, h.xp1, n, res);
                       });
}

IterationResult algorithm2_implicit(const QviProblem& p, const SolverConfig& cfg,
                                    const Seeds& seeds, const RunOptions& opts) {
  cfg.validate();
  require_implicit_coefficients(cfg);
  IterationResult out;
  const double q = forward_implicit_contraction(cfg);
  const InnerSolve inner{p, cfg, choose_inner(cfg, q, out), q, 0.0, q, "alpha/(2h^3)"};
  const double al = cfg.alpha, bh = cfg.beta * cfg.h, gh2 = cfg.gamma * cfg.h * cfg.h;
  const double h3x2 = 2.0 * cfg.h * cfg.h * cfg.h;
  return run_multistep(p, cfg, seeds, opts, std::move(out),
                       [&](const History& h, std::size_t n, IterationResult& res) {
                         const Vector known = -2.0 * (al - bh - gh2) * h.xp1 -
                                              2.0 * (2.0 * bh + gh2) * h.xn + 2.0 * (al + bh) * h.xm1 -
                                              al * h.xm2;
                         const Vector c =
                             h.xn - cfg.lambda * apply_operator(p.op, h.xp1) - known / h3x2;
                         return inner(h.xn, c, h.xp1, n, res);
                       });
}

IterationResult explicit_scheme(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds,
                                const RunOptions& opts) {
  const double h = cfg.h;
  const double hh = 2.0 * h * h * h;
  const double prefactor = hh / (1.0 + hh);
  const double cn = 1.0 - 1.0 / h + 2.0 / (h * h);
  auto out = run_multistep(p, cfg, seeds, opts, {}, [&](const History& s, std::size_t, IterationResult&) {
    const Vector hist = ((2.0 * h - 2.0) * s.xp1 + (2.0 + 2.0 * h - 2.0 * h * h) * s.xm1 - s.xm2) / hh;
    const Vector arg = cn * s.xn - cfg.lambda * apply_operator(p.op, s.xn) - hist;
    return Vector(prefactor * project_moving(p.set, s.xn, arg));
  });
  note_consistency(p, cfg, out, "explicit_scheme");
  return out;
}

IterationResult short_explicit(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds,
                               const RunOptions& opts) {
  return run_multistep(p, cfg, seeds, opts, {}, [&](const History& s, std::size_t, IterationResult&) {
    return Vector((2.0 * projected_step(p, cfg.lambda, s.xn) + 2.0 * s.xn - s.xm2) / 3.0);
  });
}

IterationResult two_step_inertial(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds,
                                  InertialVariant variant, const RunOptions& opts) {
  if (!cfg.has_theta()) throw InvalidInput("solver.theta required");
  auto out = run_multistep(p, cfg, seeds, opts, {}, [&](const History& s, std::size_t n, IterationResult&) {
    const double theta = cfg.theta_at(n);
    const Vector z = s.xn + theta * (s.xn - s.xm1);
    const Vector Tz = apply_operator(p.op, z);
    switch (variant) {
      case InertialVariant::A:
        return Vector(2.0 / 3.0 * project_moving(p.set, s.xn, 3.0 * s.xn - cfg.lambda * Tz - s.xm1));
      case InertialVariant::B:
        return Vector(2.0 / 3.0 * project_moving(p.set, s.xn, 3.0 * z - cfg.lambda * Tz - s.xm1));
      case InertialVariant::C:
        break;
    }
    return Vector(2.0 / 3.0 * project_moving(p.set, z, z - cfg.lambda * Tz - s.xm1));
  });
  note_consistency(p, cfg, out, (std::string("two_step_inertial ") + to_string(variant)).c_str());
  return out;
}

DescentReport check_descent_inequality(const QviProblem& p, const SolverConfig& cfg,
                                       const std::array<Vector, 5>& history, const Vector& x_star) {
  for (const Vector& v : history) require_dim(v, p.dim(), "check_descent_inequality iterate");
  require_dim(x_star, p.dim(), "check_descent_inequality solution");
  const auto& [xm2, xm1, xn, xp1, xp2] = history;
  const double al = cfg.alpha, bh = cfg.beta * cfg.h, gh2 = cfg.gamma * cfg.h * cfg.h;
  const Vector tail = -2.0 * xp1 + 2.0 * xm1 - xm2;

  DescentReport r;
  r.lhs = (al - bh + gh2) * (x_star - xp2).squaredNorm();
  r.rhs = al * (x_star + tail).squaredNorm() - al * (xp2 + tail).squaredNorm() +
          bh * (xp1 - 2.0 * xn + xm1).squaredNorm() + gh2 * (xn - xm1 + x_star - xp2).squaredNorm() -
          gh2 * (xn - xm1).squaredNorm();
  const double slack = 1e-12 * std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
  r.holds = r.lhs <= r.rhs + slack;
  const Vector k = apply_shift(p.set.shift(), xn);
  r.star_in_step_set = p.set.base().contains(x_star - k, 1e-12);
  return r;
}

}  // namespace qvi
