#pragma once

#include <memory>
#include <vector>

#include "forestcl/geometry.hpp"
#include "forestcl/raster.hpp"

namespace forestcl {

// Everything conditioning one census interval ]k-1, k]: the previous
// census pattern of every species together with its spatial index, the
// covariate rasters, and the (zero-based) interval index k-1.
class HistoryFrame {
 public:
  HistoryFrame(std::vector<PointPattern> patterns,
               std::vector<std::shared_ptr<const RasterField>> covariates,
               int census_index);

  int n_species() const { return static_cast<int>(patterns_.size()); }
  int n_covariates() const { return static_cast<int>(covariates_.size()); }
  int census_index() const { return census_index_; }
  const Window& window() const { return patterns_.front().window(); }

  const PointPattern& pattern(int species) const {  // species 1..p
    return patterns_.at(species - 1);
  }
  const NeighborIndex& index(int species) const {
    return *indexes_.at(species - 1);
  }
  const RasterField& covariate(int j) const {  // j 0..q-1
    return *covariates_.at(j);
  }

 private:
  std::vector<PointPattern> patterns_;
  std::vector<std::unique_ptr<NeighborIndex>> indexes_;
  std::vector<std::shared_ptr<const RasterField>> covariates_;
  int census_index_ = 0;
};

}  // namespace forestcl
