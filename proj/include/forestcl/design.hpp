#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "forestcl/history.hpp"
#include "forestcl/influence.hpp"

namespace forestcl {

enum class ModelKind { kRecruit, kDeath };

// Fixed design-vector layout: intercept block first, then the mark
// (death model only, when enabled), then covariates in file order, then
// influences in species order.
//
// Censuses map to intercept blocks via census_to_block; the default is
// one block per census (time-dependent intercepts), and mapping all
// censuses to block 0 gives a shared intercept.
struct DesignLayout {
  int n_blocks = 1;
  std::vector<int> census_to_block;  // size K, entries in 0..n_blocks-1
  bool include_mark = false;         // death model mark term (alpha)
  int q = 0;                         // covariates
  int p = 0;                         // influence components

  static DesignLayout per_census(int K, bool include_mark, int q, int p);
  static DesignLayout shared_intercept(int K, bool include_mark, int q, int p);

  int dim() const { return n_blocks + (include_mark ? 1 : 0) + q + p; }
  int block_of(int census_index) const;
  int mark_pos() const { return n_blocks; }
  int covariate_pos(int j) const { return n_blocks + (include_mark ? 1 : 0) + j; }
  int influence_pos(int l) const {  // l 0..p-1
    return n_blocks + (include_mark ? 1 : 0) + q + l;
  }
  std::string name_of(int pos, ModelKind kind) const;
};

// Design vector for a marked point given the history. Pure function of
// (x, frame, cfg, layout).
Eigen::VectorXd build_design(const MarkedPoint& x, const HistoryFrame& frame,
                             const InfluenceConfig& cfg, ModelKind kind,
                             const DesignLayout& layout);

}  // namespace forestcl
