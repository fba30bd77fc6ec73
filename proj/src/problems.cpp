#include "qvi/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qvi/projections.hpp"

namespace qvi {

QviProblem build_toy_1d() {
  Matrix A(1, 1);
  A(0, 0) = 1.0;
  Vector b(1);
  b(0) = -2.0;
  Matrix M(1, 1);
  M(0, 0) = 0.25;
  MovingSet set(Box{Vector::Zero(1), Vector::Ones(1)}, ShiftMap::affine(M, Vector::Zero(1)));
  return QviProblem(OperatorSpec::affine(A, b, 1.0, 1.0), std::move(set),
                    Vector::Constant(1, 4.0 / 3.0), "toy1d");
}

// ---------------------------------------------------------------------------
// Obstacle
// ---------------------------------------------------------------------------

namespace {

double natural_residual(const Matrix& A, const Vector& f, double k_offset, const Vector& x) {
  const Vector F = A * x - f;
  const double m = k_offset + x.minCoeff();
  double r = 0.0;
  for (Index i = 0; i < x.size(); ++i) r = std::max(r, std::abs(std::min(F(i), x(i) - m)));
  return r;
}

}  // namespace

PsorResult psor_obstacle(const Matrix& A, const Vector& f, double k_offset, double omega,
                         double tol, std::size_t max_sweeps) {
  const Index n = A.rows();
  if (A.cols() != n) throw InvalidInput("psor: A must be square");
  require_dim(f, n, "psor load");
  if (!(omega > 0.0 && omega < 2.0)) throw InvalidInput("psor: omega must lie in (0, 2)");
  for (Index i = 0; i < n; ++i)
    if (!(A(i, i) > 0.0)) throw InvalidInput("psor: diagonal of A must be positive");

  PsorResult out;
  out.x = Vector::Zero(n);
  out.natural_residual = natural_residual(A, f, k_offset, out.x);
  while (out.natural_residual > tol && out.sweeps < max_sweeps) {
    const double m = k_offset + out.x.minCoeff();
    for (Index i = 0; i < n; ++i) {
      const double r = A.row(i).dot(out.x) - f(i);
      out.x(i) = std::max(m, out.x(i) - omega * r / A(i, i));
    }
    ++out.sweeps;
    if (!out.x.allFinite()) throw DivergenceError("psor: iterate became non-finite");
    out.natural_residual = natural_residual(A, f, k_offset, out.x);
  }
  out.converged = out.natural_residual <= tol;
  return out;
}

ObstacleProblem build_obstacle(Index n, const Vector& f, double k_offset, double a, double b) {
  if (n < 2) throw InvalidInput("obstacle: n must be >= 2");
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidInput("obstacle: need finite a < b");
  require_dim(f, n, "obstacle load");
  require_finite(f, "obstacle load");
  if (!std::isfinite(k_offset)) throw InvalidInput("obstacle: k_offset must be finite");
  if (k_offset > 0.0)
    throw InvalidInput("obstacle: k_offset must be <= 0 (no x satisfies x_i >= k + min x otherwise)");

  const double delta = (b - a) / static_cast<double>(n + 1);
  const double s = 1.0 / (delta * delta);
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    A(i, i) = 2.0 * s;
    if (i > 0) A(i, i - 1) = -s;
    if (i + 1 < n) A(i, i + 1) = -s;
  }
  // Eigenvalues are (4/delta^2) sin^2(j pi / (2(n+1))), j = 1..n.
  const double angle = std::numbers::pi / (2.0 * static_cast<double>(n + 1));
  const double mu = 4.0 * s * std::pow(std::sin(angle), 2);
  const double lip = 4.0 * s * std::pow(std::sin(static_cast<double>(n) * angle), 2);

  PsorResult oracle = psor_obstacle(A, f, k_offset);
  if (!oracle.converged) {
    std::ostringstream msg;
    msg << "obstacle: PSOR reference did not converge (natural residual " << oracle.natural_residual
        << ")";
    throw Error(msg.str());
  }

  MovingSet set(NonnegOrthant{n}, ShiftMap::min_broadcast(n, k_offset));
  QviProblem problem(OperatorSpec::affine(A, -f, mu, lip), std::move(set), std::move(oracle.x),
                     "obstacle");
  return ObstacleProblem{n, a, b, delta, f, k_offset, std::move(A), std::move(problem)};
}

double obstacle_energy(const ObstacleProblem& prob, const Vector& x, const Vector& y) {
  require_dim(x, prob.n, "obstacle_energy x");
  require_dim(y, prob.n, "obstacle_energy y");
  return y.dot(prob.A * x) - 2.0 * prob.f.dot(y);
}

ComplementarityReport check_obstacle_complementarity(const ObstacleProblem& prob, const Vector& x,
                                                     double tol) {
  require_dim(x, prob.n, "check_obstacle_complementarity");
  const Vector F = prob.A * x - prob.f;
  const Vector slack = x.array() - (prob.k_offset + x.minCoeff());
  ComplementarityReport r;
  r.operator_violation = std::max(0.0, -F.minCoeff());
  r.slack_violation = std::max(0.0, -slack.minCoeff());
  r.comp_violation = F.cwiseProduct(slack).cwiseAbs().maxCoeff();
  r.feasible = r.slack_violation <= tol;
  r.passes = r.feasible && r.operator_violation <= tol && r.comp_violation <= tol;
  return r;
}

// ---------------------------------------------------------------------------
// GNEP
// ---------------------------------------------------------------------------

namespace {

std::vector<Index> block_offsets(const std::vector<Index>& dims) {
  std::vector<Index> off;
  Index acc = 0;
  for (Index d : dims) {
    off.push_back(acc);
    acc += d;
  }
  return off;
}

GnepSpec normalized(GnepSpec s) {
  if (s.dims.empty()) throw InvalidInput("gnep: at least one player required");
  Index total = 0;
  for (Index d : s.dims) {
    if (d < 1) throw InvalidInput("gnep: every player needs dimension >= 1");
    total += d;
  }
  if (s.A.rows() != total || s.A.cols() != total)
    throw DimensionMismatch("gnep payoff matrix", total, s.A.rows());
  require_dim(s.q, total, "gnep linear term");
  require_dim(s.lo, total, "gnep lower bounds");
  require_dim(s.hi, total, "gnep upper bounds");
  if (s.shift_M.size() == 0) s.shift_M = Matrix::Zero(total, total);
  if (s.shift_c.size() == 0) s.shift_c = Vector::Zero(total);
  if (s.shift_M.rows() != total || s.shift_M.cols() != total)
    throw DimensionMismatch("gnep coupling matrix", total, s.shift_M.rows());
  require_dim(s.shift_c, total, "gnep coupling offset");

  const auto off = block_offsets(s.dims);
  for (std::size_t i = 0; i < s.dims.size(); ++i) {
    const Index o = off[i], d = s.dims[i];
    const Matrix Aii = s.A.block(o, o, d, d);
    if ((Aii - Aii.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Aii.cwiseAbs().maxCoeff()))
      throw InvalidInput("gnep: own-variable block of player " + std::to_string(i) +
                         " must be symmetric");
    if (symmetric_min_eigenvalue(Aii) < -1e-12)
      throw InvalidInput("gnep: payoff of player " + std::to_string(i) +
                         " is not convex in its own variable");
    if (s.shift_M.block(o, o, d, d).cwiseAbs().maxCoeff() != 0.0)
      throw InvalidInput("gnep: strategy set of player " + std::to_string(i) +
                         " may only depend on rival variables");
  }
  return s;
}

QviProblem gnep_problem(const GnepSpec& s) {
  MovingSet set(Box{s.lo, s.hi}, ShiftMap::affine(s.shift_M, s.shift_c));
  return QviProblem(OperatorSpec::affine_exact(s.A, s.q), std::move(set), std::nullopt, "gnep");
}

}  // namespace

GnepGame::GnepGame(GnepSpec spec)
    : spec_(normalized(std::move(spec))),
      offsets_(block_offsets(spec_.dims)),
      problem_(gnep_problem(spec_)) {}

double GnepGame::utility(std::size_t i, const Vector& x) const {
  require_dim(x, dim(), "gnep utility");
  if (i >= players()) throw InvalidInput("gnep: player index out of range");
  const Index o = offsets_[i], d = spec_.dims[i];
  const Vector y = x.segment(o, d);
  const Matrix Aii = spec_.A.block(o, o, d, d);
  const Vector cross = spec_.A.middleRows(o, d) * x - Aii * y + spec_.q.segment(o, d);
  return 0.5 * y.dot(Aii * y) + y.dot(cross);
}

Vector GnepGame::best_response(std::size_t i, const Vector& x) const {
  require_dim(x, dim(), "gnep best response");
  if (i >= players()) throw InvalidInput("gnep: player index out of range");
  const Index o = offsets_[i], d = spec_.dims[i];
  const Matrix Q = spec_.A.block(o, o, d, d);
  const Vector g = spec_.A.middleRows(o, d) * x - Q * x.segment(o, d) + spec_.q.segment(o, d);
  const Vector shift = (spec_.shift_M * x + spec_.shift_c).segment(o, d);
  const Vector L = shift + spec_.lo.segment(o, d);
  const Vector U = shift + spec_.hi.segment(o, d);

  // Cyclic coordinate minimization; exact after one pass for scalar players.
  Vector y = x.segment(o, d).cwiseMax(L).cwiseMin(U);
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0.0;
    for (Index r = 0; r < d; ++r) {
      const double slope = g(r) + Q.row(r).dot(y) - Q(r, r) * y(r);
      double v;
      if (Q(r, r) > 0.0) {
        v = std::clamp(-slope / Q(r, r), L(r), U(r));
      } else {
        v = slope > 0.0 ? L(r) : (slope < 0.0 ? U(r) : y(r));
        if (std::isinf(v)) throw InvalidInput("gnep: best response is unbounded");
      }
      change = std::max(change, std::abs(v - y(r)));
      y(r) = v;
    }
    if (d == 1 || change <= 1e-15 * std::max(1.0, y.cwiseAbs().maxCoeff())) break;
  }
  return y;
}

Vector GnepGame::best_response_map(const Vector& x) const {
  Vector out(dim());
  for (std::size_t i = 0; i < players(); ++i)
    out.segment(offsets_[i], spec_.dims[i]) = best_response(i, x);
  return out;
}

GnepGame build_gnep(GnepSpec spec) {
  GnepGame game(std::move(spec));
  const QviProblem& p = game.problem();
  Vector x = project_moving(p.set, Vector::Zero(game.dim()), Vector::Zero(game.dim()));
  for (int it = 0; it < 100000; ++it) {
    const Vector next = 0.5 * x + 0.5 * game.best_response_map(x);
    const double change = (next - x).norm();
    x = next;
    if (!x.allFinite()) break;
    if (change <= 1e-10) {
      game.problem_.x_ref = x;
      break;
    }
  }
  return game;
}

BestResponseReport gnep_best_response_check(const GnepGame& game, const Vector& x, double tol) {
  BestResponseReport r;
  for (std::size_t i = 0; i < game.players(); ++i) {
    Vector dev = x;
    dev.segment(game.offset(i), game.spec().dims[i]) = game.best_response(i, x);
    r.worst_player_gap = std::max(r.worst_player_gap, game.utility(i, x) - game.utility(i, dev));
  }
  r.is_equilibrium = r.worst_player_gap <= tol;
  return r;
}

Vector gnep_projected_dynamics_rhs(const GnepGame& game, const Vector& x, double alpha_step) {
  if (!(alpha_step > 0.0)) throw InvalidInput("gnep_projected_dynamics_rhs: alpha_step must be > 0");
  const QviProblem& p = game.problem();
  return project_moving(p.set, x, x - alpha_step * apply_operator(p.op, x)) - x;
}

}  // namespace qvi
