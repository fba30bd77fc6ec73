#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qvi/core_types.hpp"

namespace qvi {

/// ||x - P_{K(x)}(x - lambda T(x))||, zero exactly at solutions.
double fixed_point_residual(const QviProblem& p, const Vector& x, double lambda);

/// ||(x - k(x)) - P_K0(x - lambda T(x) - k(x))||. Equals the fixed-point
/// residual for every translated moving set.
double gvi_residual(const QviProblem& p, const Vector& x, double lambda);

/// Open interval of step sizes lambda with
/// mu^2 lambda^2 - 2 lambda (mu - l L) + l < 0.
struct FeasibleRange {
  double lo = 0.0;
  double hi = 0.0;
  bool nonempty = false;

  [[nodiscard]] bool contains(double lambda) const {
    return nonempty && lambda > lo && lambda < hi;
  }
  [[nodiscard]] double midpoint() const { return 0.5 * (lo + hi); }
};

FeasibleRange feasible_lambda_range(double mu, double lip, double l);

/// The hypotheses of the exponential-stability result for the continuous
/// system, evaluated for a concrete configuration. None of them is enforced by
/// the solvers; the discrete schemes routinely converge outside them.
struct TheoryReport {
  FeasibleRange range;
  bool l_below_one = false;
  bool l_below_one_minus_two_beta = false;
  bool alpha_condition = false;    ///< alpha (1 - l) >= 0
  bool damping_condition = false;  ///< (1 - l)(alpha + beta) >= 3 alpha
  bool lambda_in_range = false;
  bool gamma_is_one = false;
  bool positive_coefficients = false;  ///< alpha > 0 and beta > 0

  [[nodiscard]] bool within_stated_theory() const {
    return l_below_one && l_below_one_minus_two_beta && alpha_condition && damping_condition &&
           lambda_in_range && gamma_is_one && positive_coefficients;
  }
  /// Human-readable list of the failed conditions ("outside stated theory: ...").
  [[nodiscard]] std::string summary() const;
};

TheoryReport theory_conditions(double mu, double lip, double l, const SolverConfig& cfg);

struct VasilievReport {
  double max_defect = 0.0;
  std::size_t pairs = 0;
};

/// Evaluates ||Tx - Ty||^2 + mu L ||x - y||^2 - (L + mu) <Tx - Ty, x - y> on
/// random Gaussian pairs (standard deviation `scale`) using the operator's
/// declared constants.
VasilievReport check_vasiliev(const OperatorSpec& op, std::size_t pairs, std::uint64_t seed = 0,
                              double scale = 1.0);

struct OperatorEstimate {
  double mu_hat = 0.0;
  double lip_hat = 0.0;
  std::size_t pairs_used = 0;
};

/// Empirical monotonicity and Lipschitz ratios over `samples` pairs drawn from
/// `box`. Coincident pairs are skipped.
OperatorEstimate estimate_operator_constants(const OperatorSpec& op, std::size_t samples,
                                             const BaseSet& box, std::uint64_t seed = 0);

}  // namespace qvi
