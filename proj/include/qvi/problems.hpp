#pragma once

#include <cstddef>
#include <vector>

#include "qvi/core_types.hpp"

namespace qvi {

/// One-dimensional instance: T(x) = x - 2, K(x) = 0.25 x + [0, 1], solution 4/3.
QviProblem build_toy_1d();

// ---------------------------------------------------------------------------
// Obstacle problem
// ---------------------------------------------------------------------------

struct ObstacleProblem {
  Index n = 0;
  double a = 0.0;
  double b = 1.0;
  double delta = 0.0;
  Vector f;
  double k_offset = 0.0;
  Matrix A;  ///< (1/delta^2) tridiag(-1, 2, -1)
  QviProblem problem;
};

/// Finite-difference obstacle problem on n interior points of [a, b] with
/// homogeneous Dirichlet ends. F(x) = A x - f and K(x) = (k + min_i x_i) 1 + R^n_+.
///
/// x_ref is computed by psor_obstacle. k_offset must be <= 0: for k > 0 no
/// point satisfies x in K(x).
ObstacleProblem build_obstacle(Index n, const Vector& f, double k_offset, double a = 0.0,
                               double b = 1.0);

struct PsorResult {
  Vector x;
  std::size_t sweeps = 0;
  /// max_i |min(F_i(x), x_i - M(x))|
  double natural_residual = 0.0;
  bool converged = false;
};

/// Projected SOR for A x - f >= 0, x >= M(x), complementarity, with the
/// obstacle M(x) = k + min x refreshed before each sweep.
PsorResult psor_obstacle(const Matrix& A, const Vector& f, double k_offset, double omega = 1.5,
                         double tol = 1e-10, std::size_t max_sweeps = 100000);

/// y^T A x - 2 f^T y.
double obstacle_energy(const ObstacleProblem& prob, const Vector& x, const Vector& y);

struct ComplementarityReport {
  bool feasible = false;          ///< x - M(x) 1 >= -tol
  double operator_violation = 0;  ///< max(0, -min_i (A x - f)_i)
  double slack_violation = 0;     ///< max(0, -min_i (x - M(x) 1)_i)
  double comp_violation = 0;      ///< max_i |(A x - f)_i (x - M(x) 1)_i|
  bool passes = false;            ///< all three within tol
};

ComplementarityReport check_obstacle_complementarity(const ObstacleProblem& prob, const Vector& x,
                                                     double tol);

// ---------------------------------------------------------------------------
// Generalized Nash game with quadratic payoffs
// ---------------------------------------------------------------------------

/// Player i owns the block x^i of size dims[i]. With T(x) = A x + q the payoff is
///   U_i(x) = 1/2 x^iT A_ii x^i + x^iT (sum_{j != i} A_ij x^j + q_i),
/// so T stacks the own-variable gradients. Strategy sets are translated boxes
///   S_i(x^{-i}) = (M x + c)_i + [lo_i, hi_i],
/// where M may only couple a player to its rivals.
struct GnepSpec {
  std::vector<Index> dims;
  Matrix A;
  Vector q;
  Vector lo;
  Vector hi;
  Matrix shift_M;  ///< empty means uncoupled
  Vector shift_c;  ///< empty means zero
};

class GnepGame {
 public:
  explicit GnepGame(GnepSpec spec);

  [[nodiscard]] const GnepSpec& spec() const { return spec_; }
  [[nodiscard]] const QviProblem& problem() const { return problem_; }
  [[nodiscard]] std::size_t players() const { return spec_.dims.size(); }
  [[nodiscard]] Index offset(std::size_t i) const { return offsets_[i]; }
  [[nodiscard]] Index dim() const { return spec_.A.rows(); }

  [[nodiscard]] double utility(std::size_t i, const Vector& x) const;
  /// Minimizer of U_i(., x^{-i}) over S_i(x^{-i}), returned as the block of player i.
  [[nodiscard]] Vector best_response(std::size_t i, const Vector& x) const;
  /// x with every block replaced by its best response.
  [[nodiscard]] Vector best_response_map(const Vector& x) const;

 private:
  friend GnepGame build_gnep(GnepSpec spec);
  GnepSpec spec_;
  std::vector<Index> offsets_;
  QviProblem problem_;
};

/// Validates the spec and attaches x_ref from a damped best-response iteration
/// (weight 0.5, from the projection of 0 onto K(0)) run to 1e-10. x_ref stays
/// empty when that iteration does not settle.
GnepGame build_gnep(GnepSpec spec);

struct BestResponseReport {
  bool is_equilibrium = false;
  double worst_player_gap = 0.0;
};

/// max_i [U_i(x) - min over S_i(x^{-i}) of U_i(., x^{-i})].
BestResponseReport gnep_best_response_check(const GnepGame& game, const Vector& x, double tol);

/// P_{K(x)}(x - alpha_step T(x)) - x.
Vector gnep_projected_dynamics_rhs(const GnepGame& game, const Vector& x, double alpha_step);

}  // namespace qvi
