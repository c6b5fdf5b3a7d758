#include "forestcl/design.hpp"

#include <numeric>

namespace forestcl {

HistoryFrame::HistoryFrame(
    std::vector<PointPattern> patterns,
    std::vector<std::shared_ptr<const RasterField>> covariates,
    int census_index)
    : patterns_(std::move(patterns)), covariates_(std::move(covariates)),
      census_index_(census_index) {
  if (patterns_.empty()) throw ConfigError("HistoryFrame: no patterns");
  for (const auto& p : patterns_)
    if (!(p.window() == patterns_.front().window()))
      throw ConfigError("HistoryFrame: patterns on different windows");
  for (const auto& z : covariates_) {
    if (!z) throw ConfigError("HistoryFrame: null covariate raster");
    if (!(z->window() == patterns_.front().window()))
      throw ConfigError("HistoryFrame: covariate window mismatch");
  }
  indexes_.reserve(patterns_.size());
  for (const auto& p : patterns_)
    indexes_.push_back(std::make_unique<NeighborIndex>(p));
}

DesignLayout DesignLayout::per_census(int K, bool include_mark, int q, int p) {
  DesignLayout l;
  l.n_blocks = K;
  l.census_to_block.resize(K);
  std::iota(l.census_to_block.begin(), l.census_to_block.end(), 0);
  l.include_mark = include_mark;
  l.q = q;
  l.p = p;
  return l;
}

DesignLayout DesignLayout::shared_intercept(int K, bool include_mark, int q,
                                            int p) {
  DesignLayout l;
  l.n_blocks = 1;
  l.census_to_block.assign(K, 0);
  l.include_mark = include_mark;
  l.q = q;
  l.p = p;
  return l;
}

int DesignLayout::block_of(int census_index) const {
  if (census_index < 0 ||
      census_index >= static_cast<int>(census_to_block.size()))
    throw ConfigError("DesignLayout: census index " +
                      std::to_string(census_index) + " out of range");
  return census_to_block[census_index];
}

std::string DesignLayout::name_of(int pos, ModelKind kind) const {
  const std::string o = (kind == ModelKind::kRecruit) ? "b" : "d";
  if (pos < n_blocks) return "beta0_" + o + "." + std::to_string(pos);
  int i = pos - n_blocks;
  if (include_mark) {
    if (i == 0) return "alpha";
    --i;
  }
  if (i < q) return "beta_" + o + "." + std::to_string(i + 1);
  i -= q;
  return "gamma_" + o + "." + std::to_string(i + 1);
}

Eigen::VectorXd build_design(const MarkedPoint& x, const HistoryFrame& frame,
                             const InfluenceConfig& cfg, ModelKind kind,
                             const DesignLayout& layout) {
  if (layout.p > 0 && cfg.n_species() != layout.p)
    throw ConfigError("build_design: influence config has " +
                      std::to_string(cfg.n_species()) + " species, layout " +
                      std::to_string(layout.p));
  if (layout.q > frame.n_covariates())
    throw ConfigError("build_design: layout expects more covariates than the "
                      "history frame carries");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.dim());
  v(layout.block_of(frame.census_index())) = 1.0;
  if (layout.include_mark) v(layout.mark_pos()) = x.m;
  for (int j = 0; j < layout.q; ++j)
    v(layout.covariate_pos(j)) = frame.covariate(j).lookup(x.u);
  const auto& specs =
      (kind == ModelKind::kRecruit) ? cfg.recruit : cfg.death;
  for (int l = 0; l < layout.p; ++l)
    v(layout.influence_pos(l)) = influence_value(
        x, frame.index(l + 1), specs.at(l), cfg.divide_by_own_mark);
  return v;
}

}  // namespace forestcl
