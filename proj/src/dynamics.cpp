#include "qvi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qvi/analysis.hpp"
#include "qvi/projections.hpp"

namespace qvi {

namespace {

constexpr double kConvergedDistance = 1e-14;

DynState axpy(const DynState& s, double h, const DynState& d) {
  return {s.x + h * d.x, s.v + h * d.v, s.a + h * d.a};
}

void check_finite_state(const DynState& s, double t) {
  const double n = s.norm();
  if (!std::isfinite(n) || n > kBlowUpNorm) {
    std::ostringstream msg;
    msg << "trajectory diverged at t=" << t << " (state norm " << n << ")";
    throw DivergenceError(msg.str());
  }
}

}  // namespace

DynState DynState::at_rest(const Vector& x) {
  return {x, Vector::Zero(x.size()), Vector::Zero(x.size())};
}

double DynState::norm() const {
  return std::sqrt(x.squaredNorm() + v.squaredNorm() + a.squaredNorm());
}

const char* to_string(Integrator m) { return m == Integrator::RK4 ? "rk4" : "euler"; }

DynState rhs_third_order(const QviProblem& p, const SolverConfig& cfg, const DynState& s) {
  if (!(cfg.alpha > 0.0))
    throw InvalidInput("rhs_third_order: alpha must be > 0 (the system is not third order)");
  require_dim(s.x, p.dim(), "rhs_third_order position");
  require_dim(s.v, p.dim(), "rhs_third_order velocity");
  require_dim(s.a, p.dim(), "rhs_third_order acceleration");
  const Vector target = project_moving(p.set, s.x, s.x - cfg.lambda * apply_operator(p.op, s.x));
  Vector jerk = (target - s.x - cfg.gamma * s.v - cfg.beta * s.a) / cfg.alpha;
  return {s.v, s.a, std::move(jerk)};
}

Trajectory integrate(const QviProblem& p, const SolverConfig& cfg, const DynState& init,
                     Integrator method) {
  if (!(cfg.dt > 0.0)) throw InvalidInput("integrate: dt must be > 0");
  if (!(cfg.t_end > cfg.dt)) throw InvalidInput("integrate: t_end must exceed dt");
  if (!(cfg.alpha > 0.0))
    throw InvalidInput("integrate: alpha must be > 0 (the system is not third order)");
  require_dim(init.x, p.dim(), "integrate initial position");
  require_dim(init.v, p.dim(), "integrate initial velocity");
  require_dim(init.a, p.dim(), "integrate initial acceleration");
  check_finite_state(init, 0.0);

  const double dt = cfg.dt;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_end / dt));
  Trajectory traj;
  traj.dt = dt;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(init);

  DynState s = init;
  for (std::size_t i = 1; i <= steps; ++i) {
    if (method == Integrator::RK4) {
      const DynState k1 = rhs_third_order(p, cfg, s);
      const DynState k2 = rhs_third_order(p, cfg, axpy(s, 0.5 * dt, k1));
      const DynState k3 = rhs_third_order(p, cfg, axpy(s, 0.5 * dt, k2));
      const DynState k4 = rhs_third_order(p, cfg, axpy(s, dt, k3));
      s.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
      s.v += dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
      s.a += dt / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    } else {
      s = axpy(s, dt, rhs_third_order(p, cfg, s));
    }
    const double t = static_cast<double>(i) * dt;
    check_finite_state(s, t);
    traj.times.push_back(t);
    traj.states.push_back(s);
  }
  return traj;
}

DecayOutcome fit_decay_rate(const Trajectory& traj, const Vector& x_ref, double t_skip) {
  std::vector<double> ts;
  std::vector<double> logs;
  double max_dist = 0.0;
  std::size_t post_transient = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] < t_skip) continue;
    ++post_transient;
    const double d = (traj.states[i].x - x_ref).norm();
    max_dist = std::max(max_dist, d);
    if (d > kConvergedDistance) {
      ts.push_back(traj.times[i]);
      logs.push_back(std::log(d * d));
    }
  }
  if (post_transient > 0 && ts.empty()) return AlreadyConverged{max_dist};
  if (ts.size() < 3)
    throw InvalidInput("fit_decay_rate: need at least 3 samples after t_skip with positive distance");

  const auto m = static_cast<double>(ts.size());
  double t_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    t_mean += ts[i];
    y_mean += logs[i];
  }
  t_mean /= m;
  y_mean /= m;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - t_mean) * (ts[i] - t_mean);
    sty += (ts[i] - t_mean) * (logs[i] - y_mean);
    syy += (logs[i] - y_mean) * (logs[i] - y_mean);
  }
  const double slope = stt > 0.0 ? sty / stt : 0.0;
  const double intercept = y_mean - slope * t_mean;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = logs[i] - (intercept + slope * ts[i]);
    ss_res += r * r;
  }

  DecayFit fit;
  fit.eta_hat = -0.5 * slope;
  fit.rho_hat = std::exp(0.5 * intercept);
  // A flat series is fitted exactly by its mean.
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.samples = ts.size();
  return fit;
}

Trace trajectory_trace(const QviProblem& p, const SolverConfig& cfg, const Trajectory& traj) {
  Trace trace;
  trace.rows.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vector& x = traj.states[i].x;
    const double dist = p.x_ref ? (x - *p.x_ref).norm() : -1.0;
    const double step = i == 0 ? 0.0 : (x - traj.states[i - 1].x).norm();
    trace.push(traj.times[i], fixed_point_residual(p, x, cfg.lambda), dist, step);
  }
  return trace;
}

}  // namespace qvi
