#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qvi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(const std::string& what, Index expected, Index got);
};

/// A value violates a documented range or structural constraint.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An iterate or trajectory state left the finite range (norm above 1e12 or NaN).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The inner fixed-point loop of an implicit scheme did not settle within inner_max.
class InnerSolverError : public Error {
 public:
  using Error::Error;
};

/// Norm above which iterates and ODE states are treated as blown up.
inline constexpr double kBlowUpNorm = 1e12;

/// Throws InvalidInput unless every entry of `v` is finite.
void require_finite(const Vector& v, const std::string& what);

/// Throws DimensionMismatch unless `v.size() == n`.
void require_dim(const Vector& v, Index n, const std::string& what);

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Vector field T with declared strong-monotonicity modulus mu and Lipschitz
/// constant lip.
///
/// Affine operators are checked against their matrix at construction:
/// mu may not exceed the smallest eigenvalue of the symmetric part and lip may
/// not undercut the spectral norm. Callable operators are trusted.
class OperatorSpec {
 public:
  struct Affine {
    Matrix A;
    Vector b;
  };
  struct Callable {
    Index dim = 0;
    std::function<Vector(const Vector&)> eval;
  };
  using Kind = std::variant<Affine, Callable>;

  static OperatorSpec affine(Matrix A, Vector b, double mu, double lip);
  /// Affine operator whose (mu, lip) are computed from A: mu is clamped at 0.
  static OperatorSpec affine_exact(Matrix A, Vector b);
  static OperatorSpec callable(Index dim, std::function<Vector(const Vector&)> eval, double mu,
                               double lip);

  [[nodiscard]] Index dim() const;
  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] double lip() const { return lip_; }
  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] bool is_affine() const { return std::holds_alternative<Affine>(kind_); }

 private:
  OperatorSpec(Kind kind, double mu, double lip);

  Kind kind_;
  double mu_ = 0.0;
  double lip_ = 0.0;
};

Vector apply_operator(const OperatorSpec& op, const Vector& x);

/// Smallest eigenvalue of (A + A^T)/2.
double symmetric_min_eigenvalue(const Matrix& A);
/// Largest singular value of A.
double spectral_norm(const Matrix& A);

// ---------------------------------------------------------------------------
// Base sets K0
// ---------------------------------------------------------------------------

struct Box {
  Vector lo;
  Vector hi;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

/// {x : <normal, x> <= offset}
struct Halfspace {
  Vector normal;
  double offset = 0.0;
};

/// {x >= 0 : sum(x) = radius}
struct Simplex {
  Index dim = 0;
  double radius = 1.0;
};

struct NonnegOrthant {
  Index dim = 0;
};

struct WholeSpace {
  Index dim = 0;
};

/// A nonempty closed convex set, validated on construction.
class BaseSet {
 public:
  using Variant = std::variant<Box, Ball, Halfspace, Simplex, NonnegOrthant, WholeSpace>;

  BaseSet(Box s);
  BaseSet(Ball s);
  BaseSet(Halfspace s);
  BaseSet(Simplex s);
  BaseSet(NonnegOrthant s);
  BaseSet(WholeSpace s);

  [[nodiscard]] Index dim() const;
  [[nodiscard]] const Variant& variant() const { return set_; }
  [[nodiscard]] std::string name() const;
  /// Membership up to an absolute tolerance.
  [[nodiscard]] bool contains(const Vector& x, double tol = 1e-12) const;

 private:
  void validate() const;
  Variant set_;
};

// ---------------------------------------------------------------------------
// Shift maps k(x)
// ---------------------------------------------------------------------------

struct ZeroShift {
  Index dim = 0;
};

struct AffineShift {
  Matrix M;
  Vector c;
};

/// x -> (offset + min_i x_i) * 1
struct MinBroadcastShift {
  Index dim = 0;
  double offset = 0.0;
};

/// Lipschitz translation k(x) of the moving set, with declared constant l.
class ShiftMap {
 public:
  using Variant = std::variant<ZeroShift, AffineShift, MinBroadcastShift>;

  static ShiftMap zero(Index dim);
  /// l defaults to the spectral norm of M.
  static ShiftMap affine(Matrix M, Vector c, std::optional<double> l = std::nullopt);
  /// l defaults to sqrt(dim).
  static ShiftMap min_broadcast(Index dim, double offset, std::optional<double> l = std::nullopt);

  [[nodiscard]] Index dim() const;
  [[nodiscard]] double lipschitz() const { return l_; }
  [[nodiscard]] const Variant& variant() const { return map_; }
  [[nodiscard]] bool is_zero() const { return std::holds_alternative<ZeroShift>(map_); }

 private:
  ShiftMap(Variant map, double l) : map_(std::move(map)), l_(l) {}
  Variant map_;
  double l_ = 0.0;
};

Vector apply_shift(const ShiftMap& s, const Vector& x);

/// K(x) = k(x) + K0.
class MovingSet {
 public:
  MovingSet(BaseSet base, ShiftMap shift);

  [[nodiscard]] const BaseSet& base() const { return base_; }
  [[nodiscard]] const ShiftMap& shift() const { return shift_; }
  [[nodiscard]] Index dim() const { return base_.dim(); }
  /// Lipschitz constant of the anchor dependence of the projection (2l).
  [[nodiscard]] double anchor_lipschitz() const { return 2.0 * shift_.lipschitz(); }

 private:
  BaseSet base_;
  ShiftMap shift_;
};

// ---------------------------------------------------------------------------
// Solver configuration
// ---------------------------------------------------------------------------

/// How the implicit schemes solve for x_{n+2}.
enum class InnerSolver {
  Auto,     ///< Plain when the contraction estimate is below 1, relaxed otherwise.
  Plain,    ///< w <- P(c - F(w)), a contraction only when the estimate is below 1.
  Relaxed,  ///< w <- P(w - rho (w - c + F(w))) with rho chosen from (mu, lip).
};

const char* to_string(InnerSolver s);

struct SolverConfig {
  double lambda = 0.5;
  double h = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  /// Constant inertial weight; required by the two-step inertial schemes.
  std::optional<double> theta;
  /// Per-iteration inertial weights; overrides `theta`, the last value repeats.
  std::vector<double> theta_schedule;
  double tol = 1e-8;  ///< 0 disables the early stop; all max_iters steps run
  std::size_t max_iters = 5000;
  double inner_tol = 1e-12;  ///< relative to max(1, |w|)
  std::size_t inner_max = 1000;
  InnerSolver inner_solver = InnerSolver::Auto;
  double dt = 1e-3;
  double t_end = 40.0;

  /// Throws InvalidInput naming the first offending field.
  void validate() const;
  [[nodiscard]] bool has_theta() const { return theta.has_value() || !theta_schedule.empty(); }
  /// Inertial weight for iteration n. Throws InvalidInput when none is configured.
  [[nodiscard]] double theta_at(std::size_t n) const;
};

// ---------------------------------------------------------------------------
// Problem bundle
// ---------------------------------------------------------------------------

struct QviProblem {
  QviProblem(OperatorSpec op, MovingSet set, std::optional<Vector> x_ref = std::nullopt,
             std::string label = {});

  OperatorSpec op;
  MovingSet set;
  std::optional<Vector> x_ref;
  std::string label;

  [[nodiscard]] Index dim() const { return set.dim(); }
};

}  // namespace qvi
