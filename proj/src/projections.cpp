#include "qvi/projections.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "overloaded.hpp"

namespace qvi {

using detail::Overloaded;

namespace {

Vector project_simplex(const Simplex& s, const Vector& u) {
  // Members are returned untouched; the threshold formula would otherwise
  // perturb them by rounding.
  if ((u.array() >= 0.0).all() && std::abs(u.sum() - s.radius) <= 1e-15 * std::max(1.0, s.radius))
    return u;
  std::vector<double> sorted(u.data(), u.data() + u.size());
  // Descending; equal values keep index order, which cannot change tau.
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    running += sorted[j];
    const double candidate = (running - s.radius) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) tau = candidate;
  }
  return (u.array() - tau).max(0.0).matrix();
}

}  // namespace

Vector project_base(const BaseSet& set, const Vector& u) {
  require_dim(u, set.dim(), "project_base");
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector { return u.cwiseMax(b.lo).cwiseMin(b.hi); },
          [&](const Ball& b) -> Vector {
            const Vector d = u - b.center;
            const double norm = d.norm();
            if (norm <= b.radius) return u;
            return b.center + (b.radius / norm) * d;
          },
          [&](const Halfspace& h) -> Vector {
            const double nn = h.normal.squaredNorm();
            if (nn == 0.0) throw InvalidInput("halfspace: zero normal");
            const double excess = h.normal.dot(u) - h.offset;
            if (excess <= 0.0) return u;
            return u - (excess / nn) * h.normal;
          },
          [&](const Simplex& s) -> Vector { return project_simplex(s, u); },
          [&](const NonnegOrthant&) -> Vector { return u.cwiseMax(0.0); },
          [&](const WholeSpace&) -> Vector { return u; }},
      set.variant());
}

Vector project_moving(const MovingSet& set, const Vector& anchor, const Vector& u) {
  require_dim(anchor, set.dim(), "project_moving anchor");
  require_dim(u, set.dim(), "project_moving point");
  const Vector shift = apply_shift(set.shift(), anchor);
  return shift + project_base(set.base(), u - shift);
}

Vector sample_base(const BaseSet& set, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index n = set.dim();
  auto gaussian = [&](Index m) {
    Vector g(m);
    for (Index i = 0; i < m; ++i) g(i) = gauss(rng);
    return g;
  };
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector {
            Vector x(n);
            for (Index i = 0; i < n; ++i) {
              const bool lo_inf = std::isinf(b.lo(i));
              const bool hi_inf = std::isinf(b.hi(i));
              if (!lo_inf && !hi_inf)
                x(i) = b.lo(i) + unif(rng) * (b.hi(i) - b.lo(i));
              else if (lo_inf && hi_inf)
                x(i) = scale * gauss(rng);
              else if (lo_inf)
                x(i) = b.hi(i) - scale * std::abs(gauss(rng));
              else
                x(i) = b.lo(i) + scale * std::abs(gauss(rng));
            }
            return x;
          },
          [&](const Ball& b) -> Vector {
            Vector dir = gaussian(n);
            while (dir.norm() == 0.0) dir = gaussian(n);
            const double r = b.radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
            return b.center + r * dir.normalized();
          },
          [&](const Halfspace& h) -> Vector {
            // A Gaussian point pushed inside by a random depth.
            Vector x = scale * gaussian(n);
            const double nn = h.normal.squaredNorm();
            const double excess = h.normal.dot(x) - h.offset;
            const double depth = scale * std::abs(gauss(rng)) * std::sqrt(nn);
            if (excess > 0.0) x -= ((excess + depth) / nn) * h.normal;
            return x;
          },
          [&](const Simplex& s) -> Vector {
            // Normalized exponentials are uniform on the simplex.
            std::exponential_distribution<double> expo(1.0);
            Vector x(n);
            for (Index i = 0; i < n; ++i) x(i) = expo(rng);
            return s.radius * x / x.sum();
          },
          [&](const NonnegOrthant&) -> Vector { return scale * gaussian(n).cwiseAbs(); },
          [&](const WholeSpace&) -> Vector { return scale * gaussian(n); }},
      set.variant());
}

Vector sample_moving(const MovingSet& set, const Vector& anchor, std::mt19937_64& rng,
                     double scale) {
  return apply_shift(set.shift(), anchor) + sample_base(set.base(), rng, scale);
}

VariationalReport verify_variational_characterization(const MovingSet& set, const Vector& anchor,
                                                      const Vector& z, std::size_t samples,
                                                      std::uint64_t seed) {
  if (samples < 1) throw InvalidInput("verify_variational_characterization: samples must be >= 1");
  std::mt19937_64 rng(seed);
  const Vector p = project_moving(set, anchor, z);
  const Vector normal = z - p;
  const double scale = 1.0 + z.norm();
  VariationalReport report;
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector w = sample_moving(set, anchor, rng, scale);
    report.max_violation = std::max(report.max_violation, normal.dot(w - p));
  }
  report.samples = samples;
  return report;
}

}  // namespace qvi
