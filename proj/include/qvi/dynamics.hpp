#pragma once

#include <variant>
#include <vector>

#include "qvi/core_types.hpp"
#include "qvi/trace.hpp"

namespace qvi {

/// Position, velocity and acceleration of the third-order system.
struct DynState {
  Vector x;
  Vector v;
  Vector a;

  static DynState at_rest(const Vector& x);
  [[nodiscard]] Index dim() const { return x.size(); }
  [[nodiscard]] double norm() const;
};

/// Fixed-step samples; times[i] = i * dt exactly.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<DynState> states;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

enum class Integrator { RK4, Euler };

const char* to_string(Integrator m);

/// Right-hand side of alpha x''' + beta x'' + gamma x' + x = P_{K(x)}(x - lambda T(x))
/// written as a first-order system in (x, v, a).
DynState rhs_third_order(const QviProblem& p, const SolverConfig& cfg, const DynState& s);

/// Integrates from t = 0 to cfg.t_end with step cfg.dt. Throws DivergenceError
/// naming the time when the state norm exceeds 1e12 or becomes non-finite.
Trajectory integrate(const QviProblem& p, const SolverConfig& cfg, const DynState& init,
                     Integrator method);

/// Log-linear fit log ||x(t) - x_ref||^2 ~ log(rho^2) - 2 eta t.
struct DecayFit {
  double rho_hat = 0.0;
  double eta_hat = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Returned instead of a fit when every post-transient distance is below 1e-14.
struct AlreadyConverged {
  double max_distance = 0.0;
};

using DecayOutcome = std::variant<DecayFit, AlreadyConverged>;

/// Fits the exponential decay of the distance to `x_ref` over samples with
/// t >= t_skip. Throws InvalidInput when fewer than three usable samples exist
/// but not all of them are converged.
DecayOutcome fit_decay_rate(const Trajectory& traj, const Vector& x_ref, double t_skip);

/// Default transient cut-off: 10% of the horizon.
inline double default_t_skip(const SolverConfig& cfg) { return 0.1 * cfg.t_end; }

/// One trace row per trajectory sample: (t, residual, dist_ref, ||x(t) - x(t - dt)||).
Trace trajectory_trace(const QviProblem& p, const SolverConfig& cfg, const Trajectory& traj);

}  // namespace qvi
