#include "qvi/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "overloaded.hpp"

namespace qvi {

namespace {

// Slack for comparing declared constants against computed spectra.
double spectral_slack(double value) { return 1e-9 * std::max(1.0, std::abs(value)); }

}  // namespace

using detail::Overloaded;

DimensionMismatch::DimensionMismatch(const std::string& what, Index expected, Index got)
    : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
            std::to_string(got)) {}

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) throw InvalidInput(what + ": entries must be finite");
}

void require_dim(const Vector& v, Index n, const std::string& what) {
  if (v.size() != n) throw DimensionMismatch(what, n, v.size());
}

double symmetric_min_eigenvalue(const Matrix& A) {
  const Matrix sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double spectral_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------

OperatorSpec::OperatorSpec(Kind kind, double mu, double lip)
    : kind_(std::move(kind)), mu_(mu), lip_(lip) {
  if (!(mu_ >= 0.0) || !std::isfinite(mu_)) throw InvalidInput("operator: mu must be >= 0");
  if (!(lip_ >= 0.0) || !std::isfinite(lip_)) throw InvalidInput("operator: lip must be >= 0");
  if (mu_ > 0.0 && mu_ > lip_ + spectral_slack(lip_))
    throw InvalidInput("operator: mu must not exceed lip");
}

OperatorSpec OperatorSpec::affine(Matrix A, Vector b, double mu, double lip) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw InvalidInput("affine operator: A must be square and nonempty");
  require_dim(b, A.rows(), "affine operator offset");
  if (!A.allFinite()) throw InvalidInput("affine operator: A must be finite");
  require_finite(b, "affine operator offset");
  const double lmin = symmetric_min_eigenvalue(A);
  const double norm = spectral_norm(A);
  if (mu > lmin + spectral_slack(lmin)) {
    std::ostringstream msg;
    msg << "affine operator: declared mu=" << mu << " exceeds min eigenvalue " << lmin
        << " of the symmetric part";
    throw InvalidInput(msg.str());
  }
  if (lip < norm - spectral_slack(norm)) {
    std::ostringstream msg;
    msg << "affine operator: declared lip=" << lip << " is below the spectral norm " << norm;
    throw InvalidInput(msg.str());
  }
  return OperatorSpec(Affine{std::move(A), std::move(b)}, mu, lip);
}

OperatorSpec OperatorSpec::affine_exact(Matrix A, Vector b) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw InvalidInput("affine operator: A must be square and nonempty");
  const double mu = std::max(0.0, symmetric_min_eigenvalue(A));
  const double lip = spectral_norm(A);
  return affine(std::move(A), std::move(b), mu, lip);
}

OperatorSpec OperatorSpec::callable(Index dim, std::function<Vector(const Vector&)> eval,
                                    double mu, double lip) {
  if (dim < 1) throw InvalidInput("callable operator: dimension must be >= 1");
  if (!eval) throw InvalidInput("callable operator: empty evaluation rule");
  return OperatorSpec(Callable{dim, std::move(eval)}, mu, lip);
}

Index OperatorSpec::dim() const {
  return std::visit(Overloaded{[](const Affine& a) { return a.A.rows(); },
                               [](const Callable& c) { return c.dim; }},
                    kind_);
}

Vector apply_operator(const OperatorSpec& op, const Vector& x) {
  require_dim(x, op.dim(), "apply_operator");
  return std::visit(Overloaded{[&](const OperatorSpec::Affine& a) -> Vector { return a.A * x + a.b; },
                               [&](const OperatorSpec::Callable& c) -> Vector {
                                 Vector y = c.eval(x);
                                 require_dim(y, c.dim, "callable operator result");
                                 return y;
                               }},
                    op.kind());
}

// ---------------------------------------------------------------------------

BaseSet::BaseSet(Box s) : set_(std::move(s)) { validate(); }
BaseSet::BaseSet(Ball s) : set_(std::move(s)) { validate(); }
BaseSet::BaseSet(Halfspace s) : set_(std::move(s)) { validate(); }
BaseSet::BaseSet(Simplex s) : set_(s) { validate(); }
BaseSet::BaseSet(NonnegOrthant s) : set_(s) { validate(); }
BaseSet::BaseSet(WholeSpace s) : set_(s) { validate(); }

void BaseSet::validate() const {
  std::visit(
      Overloaded{
          [](const Box& b) {
            if (b.lo.size() < 1) throw InvalidInput("box: dimension must be >= 1");
            require_dim(b.hi, b.lo.size(), "box upper bound");
            if (b.lo.hasNaN() || b.hi.hasNaN()) throw InvalidInput("box: NaN bound");
            if ((b.lo.array() > b.hi.array()).any()) throw InvalidInput("box: lo must be <= hi");
          },
          [](const Ball& b) {
            if (b.center.size() < 1) throw InvalidInput("ball: dimension must be >= 1");
            require_finite(b.center, "ball center");
            if (!(b.radius > 0.0) || !std::isfinite(b.radius))
              throw InvalidInput("ball: radius must be > 0");
          },
          [](const Halfspace& h) {
            if (h.normal.size() < 1) throw InvalidInput("halfspace: dimension must be >= 1");
            require_finite(h.normal, "halfspace normal");
            if (!std::isfinite(h.offset)) throw InvalidInput("halfspace: offset must be finite");
            if (h.normal.squaredNorm() == 0.0) throw InvalidInput("halfspace: zero normal");
          },
          [](const Simplex& s) {
            if (s.dim < 1) throw InvalidInput("simplex: dimension must be >= 1");
            if (!(s.radius > 0.0) || !std::isfinite(s.radius))
              throw InvalidInput("simplex: radius must be > 0");
          },
          [](const NonnegOrthant& o) {
            if (o.dim < 1) throw InvalidInput("orthant: dimension must be >= 1");
          },
          [](const WholeSpace& w) {
            if (w.dim < 1) throw InvalidInput("whole space: dimension must be >= 1");
          }},
      set_);
}

Index BaseSet::dim() const {
  return std::visit(Overloaded{[](const Box& b) { return b.lo.size(); },
                               [](const Ball& b) { return b.center.size(); },
                               [](const Halfspace& h) { return h.normal.size(); },
                               [](const Simplex& s) { return s.dim; },
                               [](const NonnegOrthant& o) { return o.dim; },
                               [](const WholeSpace& w) { return w.dim; }},
                    set_);
}

std::string BaseSet::name() const {
  return std::visit(Overloaded{[](const Box&) { return "box"; },
                               [](const Ball&) { return "ball"; },
                               [](const Halfspace&) { return "halfspace"; },
                               [](const Simplex&) { return "simplex"; },
                               [](const NonnegOrthant&) { return "nonneg_orthant"; },
                               [](const WholeSpace&) { return "whole_space"; }},
                    set_);
}

bool BaseSet::contains(const Vector& x, double tol) const {
  require_dim(x, dim(), "BaseSet::contains");
  return std::visit(
      Overloaded{[&](const Box& b) {
                   return ((x.array() >= b.lo.array() - tol) && (x.array() <= b.hi.array() + tol))
                       .all();
                 },
                 [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
                 [&](const Halfspace& h) { return h.normal.dot(x) <= h.offset + tol; },
                 [&](const Simplex& s) {
                   return (x.array() >= -tol).all() && std::abs(x.sum() - s.radius) <= tol;
                 },
                 [&](const NonnegOrthant&) { return (x.array() >= -tol).all(); },
                 [&](const WholeSpace&) { return x.allFinite(); }},
      set_);
}

// ---------------------------------------------------------------------------

ShiftMap ShiftMap::zero(Index dim) {
  if (dim < 1) throw InvalidInput("zero shift: dimension must be >= 1");
  return ShiftMap(ZeroShift{dim}, 0.0);
}

ShiftMap ShiftMap::affine(Matrix M, Vector c, std::optional<double> l) {
  if (M.rows() != M.cols() || M.rows() < 1)
    throw InvalidInput("affine shift: M must be square and nonempty");
  require_dim(c, M.rows(), "affine shift offset");
  if (!M.allFinite()) throw InvalidInput("affine shift: M must be finite");
  require_finite(c, "affine shift offset");
  const double norm = spectral_norm(M);
  const double declared = l.value_or(norm);
  if (!(declared >= 0.0) || declared < norm - spectral_slack(norm))
    throw InvalidInput("affine shift: declared l is below the spectral norm of M");
  return ShiftMap(AffineShift{std::move(M), std::move(c)}, declared);
}

ShiftMap ShiftMap::min_broadcast(Index dim, double offset, std::optional<double> l) {
  if (dim < 1) throw InvalidInput("min-broadcast shift: dimension must be >= 1");
  if (!std::isfinite(offset)) throw InvalidInput("min-broadcast shift: offset must be finite");
  const double bound = std::sqrt(static_cast<double>(dim));
  const double declared = l.value_or(bound);
  if (declared < bound - spectral_slack(bound))
    throw InvalidInput("min-broadcast shift: declared l must be >= sqrt(n)");
  return ShiftMap(MinBroadcastShift{dim, offset}, declared);
}

Index ShiftMap::dim() const {
  return std::visit(Overloaded{[](const ZeroShift& z) { return z.dim; },
                               [](const AffineShift& a) { return a.M.rows(); },
                               [](const MinBroadcastShift& m) { return m.dim; }},
                    map_);
}

Vector apply_shift(const ShiftMap& s, const Vector& x) {
  require_dim(x, s.dim(), "apply_shift");
  return std::visit(
      Overloaded{[&](const ZeroShift& z) -> Vector { return Vector::Zero(z.dim); },
                 [&](const AffineShift& a) -> Vector { return a.M * x + a.c; },
                 [&](const MinBroadcastShift& m) -> Vector {
                   return Vector::Constant(m.dim, m.offset + x.minCoeff());
                 }},
      s.variant());
}

MovingSet::MovingSet(BaseSet base, ShiftMap shift) : base_(std::move(base)), shift_(std::move(shift)) {
  if (base_.dim() != shift_.dim())
    throw DimensionMismatch("moving set shift", base_.dim(), shift_.dim());
}

// ---------------------------------------------------------------------------

const char* to_string(InnerSolver s) {
  switch (s) {
    case InnerSolver::Auto:
      return "auto";
    case InnerSolver::Plain:
      return "plain";
    case InnerSolver::Relaxed:
      return "relaxed";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidInput(std::string("solver.") + field + " must be > 0");
  };
  auto nonneg = [](double v, const char* field) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InvalidInput(std::string("solver.") + field + " must be >= 0");
  };
  positive(lambda, "lambda");
  positive(h, "h");
  nonneg(alpha, "alpha");
  nonneg(beta, "beta");
  nonneg(gamma, "gamma");
  nonneg(tol, "tol");
  positive(inner_tol, "inner_tol");
  positive(dt, "dt");
  positive(t_end, "t_end");
  if (max_iters < 1) throw InvalidInput("solver.max_iters must be >= 1");
  if (inner_max < 1) throw InvalidInput("solver.inner_max must be >= 1");
  if (theta && !(*theta >= 0.0 && *theta <= 1.0))
    throw InvalidInput("solver.theta must lie in [0,1]");
  for (double t : theta_schedule)
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("solver.theta must lie in [0,1]");
}

double SolverConfig::theta_at(std::size_t n) const {
  if (!theta_schedule.empty()) return theta_schedule[std::min(n, theta_schedule.size() - 1)];
  if (theta) return *theta;
  throw InvalidInput("solver.theta required");
}

// ---------------------------------------------------------------------------

QviProblem::QviProblem(OperatorSpec op_, MovingSet set_, std::optional<Vector> x_ref_,
                       std::string label_)
    : op(std::move(op_)), set(std::move(set_)), x_ref(std::move(x_ref_)), label(std::move(label_)) {
  if (op.dim() != set.dim()) throw DimensionMismatch("problem operator vs set", set.dim(), op.dim());
  if (x_ref) {
    require_dim(*x_ref, set.dim(), "problem reference solution");
    require_finite(*x_ref, "problem reference solution");
  }
}

}  // namespace qvi
