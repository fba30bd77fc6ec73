#pragma once

// Reference computations for the test suites. Nothing here calls into the
// library, so each helper is an independent route to the value it checks.

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Projection onto {x >= 0, sum x = r} by enumerating every support set.
/// Exponential in n; fine for n <= 12.
VectorXd simplex_projection_by_supports(const VectorXd& u, double r);

/// Minimizer over a grid of |x - clamp(x - lambda (x - 2), x/4, x/4 + 1)|, the
/// fixed-point residual of the one-dimensional test instance.
struct GridMinimum {
  double x;
  double residual;
};
GridMinimum toy_grid_search(double lambda, double lo, double hi, double step);

/// Exact solution of s' = A s + b at time t via the eigendecomposition of A.
/// A must be diagonalizable and nonsingular.
VectorXd affine_ode_exact(const MatrixXd& A, const VectorXd& b, const VectorXd& s0, double t);

/// Companion form of alpha x''' + beta x'' + gamma x' + c x = d in (x, x', x'').
void third_order_companion(double alpha, double beta, double gamma, double c, double d, MatrixXd& A,
                           VectorXd& b);

/// (1/delta^2) tridiag(-1, 2, -1) with delta = (b - a)/(n + 1).
MatrixXd dirichlet_laplacian(int n, double a, double b);

/// Dense solve of the unconstrained stationarity A x = f.
VectorXd dense_solve(const MatrixXd& A, const VectorXd& f);

/// argmin over [lo, hi] of 1/2 q y^2 + g y for q > 0.
double scalar_best_response(double q, double g, double lo, double hi);

/// Symmetric positive definite matrix with eigenvalues spread over [mu, lip],
/// including both endpoints.
MatrixXd random_spd(int n, double mu, double lip, std::mt19937_64& rng);

}  // namespace oracle
