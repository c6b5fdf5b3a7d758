#pragma once

#include <vector>

#include "forestcl/geometry.hpp"

namespace forestcl {

// How one species' past pattern enters a model: either a Gaussian
// dispersal kernel of the mark-weighted nearest distance, or a
// mark-weighted Gaussian competition index.
enum class InfluenceKind { kDispersal, kCompetition };

struct InfluenceSpec {
  InfluenceKind kind = InfluenceKind::kDispersal;
  double range = 1.0;  // psi for dispersal, kappa for competition

  InfluenceSpec() = default;
  InfluenceSpec(InfluenceKind k, double r) : kind(k), range(r) {
    if (!(range > 0)) throw ConfigError("InfluenceSpec: range must be > 0");
  }
  static InfluenceSpec dispersal(double psi) {
    return {InfluenceKind::kDispersal, psi};
  }
  static InfluenceSpec competition(double kappa) {
    return {InfluenceKind::kCompetition, kappa};
  }
};

// Per-species influence wiring for the recruit and death models.
struct InfluenceConfig {
  std::vector<InfluenceSpec> recruit;  // one entry per species 1..p
  std::vector<InfluenceSpec> death;
  bool divide_by_own_mark = true;  // the 1/m factor in competition indices

  int n_species() const { return static_cast<int>(recruit.size()); }
};

// Competition sums are truncated at 5 * kappa; the kernel is below
// exp(-25) there, so the truncation error is at most exp(-25) * n
// relative to the largest term.
inline constexpr double kCompetitionTruncationFactor = 5.0;

// exp(-(d/psi)^2) with d the mark-weighted nearest distance from x to
// the indexed pattern (excluding x itself by id); 0 for an empty
// pattern. Always in [0, 1].
double dispersal_influence(const MarkedPoint& x, const NeighborIndex& index,
                           double psi);

// Sum over (u', m') in the pattern (excluding x by id) within radius
// 5*kappa of (m'/m or m') * exp(-(||u-u'||/kappa)^2).
double competition_index(const MarkedPoint& x, const NeighborIndex& index,
                         double kappa, bool divide_by_own_mark);

// Influence of species l's pattern on x under the given spec.
double influence_value(const MarkedPoint& x, const NeighborIndex& index,
                       const InfluenceSpec& spec, bool divide_by_own_mark);

}  // namespace forestcl
