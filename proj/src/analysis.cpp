#include "qvi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qvi/projections.hpp"

namespace qvi {

double fixed_point_residual(const QviProblem& p, const Vector& x, double lambda) {
  if (!(lambda > 0.0)) throw InvalidInput("fixed_point_residual: lambda must be > 0");
  const Vector step = x - lambda * apply_operator(p.op, x);
  return (x - project_moving(p.set, x, step)).norm();
}

double gvi_residual(const QviProblem& p, const Vector& x, double lambda) {
  if (!(lambda > 0.0)) throw InvalidInput("gvi_residual: lambda must be > 0");
  const Vector k = apply_shift(p.set.shift(), x);
  const Vector step = x - lambda * apply_operator(p.op, x) - k;
  return ((x - k) - project_base(p.set.base(), step)).norm();
}

FeasibleRange feasible_lambda_range(double mu, double lip, double l) {
  if (!(mu > 0.0)) throw InvalidInput("feasible_lambda_range: mu must be > 0");
  if (!(lip >= mu)) throw InvalidInput("feasible_lambda_range: lip must be >= mu");
  if (!(l >= 0.0)) throw InvalidInput("feasible_lambda_range: l must be >= 0");
  const double margin = mu - l * lip;
  const double disc = margin * margin - mu * mu * l;
  FeasibleRange r;
  if (margin <= 0.0 || disc <= 0.0) return r;
  const double root = std::sqrt(disc);
  r.lo = (margin - root) / (mu * mu);
  r.hi = (margin + root) / (mu * mu);
  r.nonempty = r.hi > r.lo;
  return r;
}

TheoryReport theory_conditions(double mu, double lip, double l, const SolverConfig& cfg) {
  TheoryReport t;
  if (mu > 0.0 && lip >= mu) t.range = feasible_lambda_range(mu, lip, l);
  t.l_below_one = l < 1.0;
  t.l_below_one_minus_two_beta = l < 1.0 - 2.0 * cfg.beta;
  t.alpha_condition = cfg.alpha * (1.0 - l) >= 0.0;
  t.damping_condition = (1.0 - l) * (cfg.alpha + cfg.beta) >= 3.0 * cfg.alpha;
  t.lambda_in_range = t.range.contains(cfg.lambda);
  t.gamma_is_one = cfg.gamma == 1.0;
  t.positive_coefficients = cfg.alpha > 0.0 && cfg.beta > 0.0;
  return t;
}

std::string TheoryReport::summary() const {
  if (within_stated_theory()) return "within stated theory";
  std::ostringstream out;
  out << "outside stated theory:";
  if (!l_below_one) out << " l>=1";
  if (!l_below_one_minus_two_beta) out << " l>=1-2beta";
  if (!alpha_condition) out << " alpha(1-l)<0";
  if (!damping_condition) out << " (1-l)(alpha+beta)<3alpha";
  if (!lambda_in_range) out << " lambda-not-in-feasible-range";
  if (!gamma_is_one) out << " gamma!=1";
  if (!positive_coefficients) out << " alpha-or-beta-not-positive";
  return out.str();
}

VasilievReport check_vasiliev(const OperatorSpec& op, std::size_t pairs, std::uint64_t seed,
                              double scale) {
  if (!(op.mu() > 0.0) || !(op.lip() > 0.0))
    throw InvalidInput("check_vasiliev: operator needs mu > 0 and lip > 0");
  if (pairs < 1) throw InvalidInput("check_vasiliev: pairs must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  const Index n = op.dim();
  const double mu = op.mu();
  const double lip = op.lip();
  VasilievReport report;
  report.max_defect = -std::numeric_limits<double>::infinity();
  Vector x(n), y(n);
  for (std::size_t s = 0; s < pairs; ++s) {
    for (Index i = 0; i < n; ++i) x(i) = gauss(rng);
    for (Index i = 0; i < n; ++i) y(i) = gauss(rng);
    const Vector dT = apply_operator(op, x) - apply_operator(op, y);
    const Vector d = x - y;
    const double lhs = dT.squaredNorm() + mu * lip * d.squaredNorm();
    const double rhs = (lip + mu) * dT.dot(d);
    report.max_defect = std::max(report.max_defect, lhs - rhs);
  }
  report.pairs = pairs;
  return report;
}

OperatorEstimate estimate_operator_constants(const OperatorSpec& op, std::size_t samples,
                                             const BaseSet& box, std::uint64_t seed) {
  if (samples < 2) throw InvalidInput("estimate_operator_constants: samples must be >= 2");
  require_dim(Vector::Zero(box.dim()), op.dim(), "estimate_operator_constants sampling set");
  std::mt19937_64 rng(seed);
  OperatorEstimate est;
  est.mu_hat = std::numeric_limits<double>::infinity();
  est.lip_hat = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector x = sample_base(box, rng);
    const Vector y = sample_base(box, rng);
    const Vector d = x - y;
    const double dd = d.squaredNorm();
    if (dd == 0.0) continue;
    const Vector dT = apply_operator(op, x) - apply_operator(op, y);
    est.mu_hat = std::min(est.mu_hat, dT.dot(d) / dd);
    est.lip_hat = std::max(est.lip_hat, dT.norm() / std::sqrt(dd));
    ++est.pairs_used;
  }
  if (est.pairs_used == 0) est.mu_hat = 0.0;
  return est;
}

}  // namespace qvi
