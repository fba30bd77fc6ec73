#pragma once

#include <cstdint>
#include <random>

#include "qvi/core_types.hpp"

namespace qvi {

/// Euclidean projection of `u` onto a base set.
///
/// Box and orthant clamp componentwise, the ball scales radially, the
/// halfspace subtracts the normal component of the excess, and the simplex
/// uses sort-and-threshold: find tau with sum(max(u_i - tau, 0)) = r. Points
/// already in the set are returned unchanged.
Vector project_base(const BaseSet& set, const Vector& u);

/// Projection onto K(anchor) = k(anchor) + K0, computed as
/// k(anchor) + P_K0(u - k(anchor)).
Vector project_moving(const MovingSet& set, const Vector& anchor, const Vector& u);

/// Draws a point of the base set. Unbounded directions are sampled with a
/// Gaussian of standard deviation `scale`; bounded sets ignore it except for
/// infinite box sides.
Vector sample_base(const BaseSet& set, std::mt19937_64& rng, double scale = 1.0);

/// Draws a point of K(anchor).
Vector sample_moving(const MovingSet& set, const Vector& anchor, std::mt19937_64& rng,
                     double scale = 1.0);

struct VariationalReport {
  double max_violation = 0.0;
  std::size_t samples = 0;
};

/// Samples w in K(anchor) and returns max <z - P(z), w - P(z)>, which is <= 0
/// for an exact projection.
VariationalReport verify_variational_characterization(const MovingSet& set, const Vector& anchor,
                                                      const Vector& z, std::size_t samples,
                                                      std::uint64_t seed = 0);

}  // namespace qvi
