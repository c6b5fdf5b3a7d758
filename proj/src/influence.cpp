#include "forestcl/influence.hpp"

#include <cmath>

namespace forestcl {

double dispersal_influence(const MarkedPoint& x, const NeighborIndex& index,
                           double psi) {
  if (!(psi > 0)) throw ConfigError("dispersal_influence: psi must be > 0");
  const double d = index.nearest_mark_weighted(x.u, x.id);
  if (!std::isfinite(d)) return 0.0;
  const double t = d / psi;
  return std::exp(-t * t);
}

double competition_index(const MarkedPoint& x, const NeighborIndex& index,
                         double kappa, bool divide_by_own_mark) {
  if (!(kappa > 0)) throw ConfigError("competition_index: kappa must be > 0");
  if (divide_by_own_mark && !(x.m > 0))
    throw ConfigError("competition_index: own mark must be > 0");
  const double inv_k2 = 1.0 / (kappa * kappa);
  double sum = 0.0;
  index.for_each_in_radius(
      x.u, kCompetitionTruncationFactor * kappa, [&](std::size_t i, double d2) {
        const auto& p = index.pattern()[i];
        if (p.id == x.id) return;
        sum += p.m * std::exp(-d2 * inv_k2);
      });
  return divide_by_own_mark ? sum / x.m : sum;
}

double influence_value(const MarkedPoint& x, const NeighborIndex& index,
                       const InfluenceSpec& spec, bool divide_by_own_mark) {
  return spec.kind == InfluenceKind::kDispersal
             ? dispersal_influence(x, index, spec.range)
             : competition_index(x, index, spec.range, divide_by_own_mark);
}

}  // namespace forestcl
