#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qvi/core_types.hpp"
#include "qvi/trace.hpp"

namespace qvi {

/// The three starting points x0, x1, x2. The multistep recurrences read four
/// history slots (x_{n-2}, x_{n-1}, x_n, x_{n+1}); the fourth is one
/// gradient-projection step from x2.
struct Seeds {
  Vector x0;
  Vector x1;
  Vector x2;

  static Seeds constant(const Vector& x) { return {x, x, x}; }
};

enum class InertialVariant { A, B, C };

const char* to_string(InertialVariant v);

struct RunOptions {
  /// Keep every iterate (seeds, the fourth history point, then one per step).
  bool record_iterates = false;
};

struct IterationResult {
  Vector x_final;
  std::size_t iterations = 0;
  bool converged = false;
  /// Row 0 is the newest starting point; one row per outer iteration after it.
  Trace trace;
  /// Implicit schemes only.
  std::size_t inner_iterations_total = 0;
  /// Contraction estimate of the plain inner map (implicit schemes only).
  std::optional<double> contraction_estimate;
  std::optional<InnerSolver> inner_solver_used;
  std::vector<std::string> warnings;
  std::vector<Vector> iterates;
};

/// x_{n+1} = P_{K(x_n)}(x_n - lambda T(x_n)).
IterationResult gradient_projection(const QviProblem& p, const SolverConfig& cfg, const Vector& x0,
                                    const RunOptions& opts = {});

/// lambda * lip + alpha / (2 h^3): plain inner iteration of the central-difference
/// implicit scheme contracts when this is below 1.
double central_implicit_contraction(const OperatorSpec& op, const SolverConfig& cfg);

/// alpha / (2 h^3): the same for the forward-difference implicit scheme.
double forward_implicit_contraction(const SolverConfig& cfg);

/// Central-difference implicit scheme. x_{n+2} solves
///   w = P_{K(x_n)}[x_n - lambda T(w)
///         - (alpha w - 2(alpha - beta h) x_{n+1} - 2(2 beta h - gamma h^2) x_n
///            + 2(alpha + beta h - gamma h^2) x_{n-1} - alpha x_{n-2}) / (2 h^3)].
/// Throws InnerSolverError when the inner loop exceeds cfg.inner_max.
IterationResult algorithm1_implicit(const QviProblem& p, const SolverConfig& cfg,
                                    const Seeds& seeds, const RunOptions& opts = {});

/// Forward-difference implicit scheme: T is evaluated at x_{n+1} and only the
/// alpha w / (2 h^3) term is implicit, with history coefficients
///   -2(alpha - beta h - gamma h^2), -2(2 beta h + gamma h^2), 2(alpha + beta h), -alpha.
IterationResult algorithm2_implicit(const QviProblem& p, const SolverConfig& cfg,
                                    const Seeds& seeds, const RunOptions& opts = {});

/// x_{n+2} = (H/(1+H)) P_{K(x_n)}[(1 - 1/h + 2/h^2) x_n - lambda T(x_n)
///            - ((2h - 2) x_{n+1} + (2 + 2h - 2h^2) x_{n-1} - x_{n-2}) / (2 h^3)],  H = 2h^3.
/// Applied as written; its fixed points need not solve the QVI.
IterationResult explicit_scheme(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds,
                                const RunOptions& opts = {});

/// 3 x_{n+2} - 2 x_n + x_{n-2} = 2 P_{K(x_n)}(x_n - lambda T(x_n)).
IterationResult short_explicit(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds,
                               const RunOptions& opts = {});

/// z_n = x_n + theta_n (x_n - x_{n-1}) and
///   A: x_{n+2} = 2/3 P_{K(x_n)}(3 x_n - lambda T z_n - x_{n-1})
///   B: x_{n+2} = 2/3 P_{K(x_n)}(3 z_n - lambda T z_n - x_{n-1})
///   C: x_{n+2} = 2/3 P_{K(z_n)}(z_n - lambda T z_n - x_{n-1})
/// Applied as written; limits are reported with their residuals.
IterationResult two_step_inertial(const QviProblem& p, const SolverConfig& cfg, const Seeds& seeds,
                                  InertialVariant variant, const RunOptions& opts = {});

struct DescentReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  /// Whether x_star lies in K(x_n), the set the step projected onto.
  bool star_in_step_set = false;
};

/// Evaluates, for five consecutive iterates (x_{n-2}, x_{n-1}, x_n, x_{n+1}, x_{n+2}),
///   (alpha - beta h + gamma h^2) ||x* - x_{n+2}||^2
///     <= alpha ||x* - 2x_{n+1} + 2x_{n-1} - x_{n-2}||^2
///      - alpha ||x_{n+2} - 2x_{n+1} + 2x_{n-1} - x_{n-2}||^2
///      + beta h ||x_{n+1} - 2x_n + x_{n-1}||^2
///      + gamma h^2 ||x_n - x_{n-1} + x* - x_{n+2}||^2 - gamma h^2 ||x_n - x_{n-1}||^2.
/// `holds` allows a relative rounding slack of 1e-12.
DescentReport check_descent_inequality(const QviProblem& p, const SolverConfig& cfg,
                                       const std::array<Vector, 5>& history, const Vector& x_star);

}  // namespace qvi
