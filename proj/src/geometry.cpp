#include "forestcl/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace forestcl {

PointPattern::PointPattern(std::vector<MarkedPoint> pts, const Window& w)
    : points_(std::move(pts)), window_(w) {
  sorted_ids_.reserve(points_.size());
  for (const auto& p : points_) {
    if (!std::isfinite(p.u.x()) || !std::isfinite(p.u.y()))
      throw DataError("PointPattern: non-finite location for id " +
                      std::to_string(p.id));
    if (!(p.m > 0))
      throw DataError("PointPattern: non-positive mark for id " +
                      std::to_string(p.id));
    if (!window_.contains(p.u.x(), p.u.y()))
      throw DataError("PointPattern: point outside window, id " +
                      std::to_string(p.id));
    sorted_ids_.push_back(p.id);
  }
  std::sort(sorted_ids_.begin(), sorted_ids_.end());
  if (std::adjacent_find(sorted_ids_.begin(), sorted_ids_.end()) !=
      sorted_ids_.end())
    throw DataError("PointPattern: duplicate tree id");
}

bool PointPattern::contains_id(std::int64_t id) const {
  return std::binary_search(sorted_ids_.begin(), sorted_ids_.end(), id);
}

SetDifference set_difference(const PointPattern& current,
                             const PointPattern& previous) {
  if (!(current.window() == previous.window()))
    throw ConfigError("set_difference: patterns have different windows");
  std::vector<MarkedPoint> rec, dead;
  for (const auto& p : current.points())
    if (!previous.contains_id(p.id)) rec.push_back(p);
  for (const auto& p : previous.points())
    if (!current.contains_id(p.id)) dead.push_back(p);
  return {PointPattern(std::move(rec), current.window()),
          PointPattern(std::move(dead), current.window())};
}

NeighborIndex::NeighborIndex(const PointPattern& pattern)
    : pattern_(&pattern) {
  const Window& w = pattern.window();
  const std::size_t n = std::max<std::size_t>(pattern.size(), 1);
  // Aim for ~1 point per cell, with a floor to keep the grid small.
  const double target = std::sqrt(w.area() / static_cast<double>(n));
  cell_ = std::max(target, 1e-9 * w.diagonal());
  ncx_ = std::max(1, static_cast<int>(std::floor(w.width() / cell_)));
  ncy_ = std::max(1, static_cast<int>(std::floor(w.height() / cell_)));
  ncx_ = std::min(ncx_, 4096);
  ncy_ = std::min(ncy_, 4096);
  cells_.assign(static_cast<std::size_t>(ncx_) * ncy_, {});
  max_mark_ = 0.0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const auto& p = pattern[i];
    int cx = std::min(ncx_ - 1, std::max(0, static_cast<int>(std::floor(
                                                (p.u.x() - w.xmin) * ncx_ /
                                                w.width()))));
    int cy = std::min(ncy_ - 1, std::max(0, static_cast<int>(std::floor(
                                                (p.u.y() - w.ymin) * ncy_ /
                                                w.height()))));
    cells_[cell_id(cx, cy)].push_back(i);
    max_mark_ = std::max(max_mark_, p.m);
  }
}

void NeighborIndex::cell_range(const Eigen::Vector2d& q, double r, int& c0,
                               int& c1, int& r0, int& r1) const {
  const Window& w = pattern_->window();
  const double sx = w.width() / ncx_, sy = w.height() / ncy_;
  c0 = std::max(0, static_cast<int>(std::floor((q.x() - r - w.xmin) / sx)));
  c1 = std::min(ncx_ - 1,
                static_cast<int>(std::floor((q.x() + r - w.xmin) / sx)));
  r0 = std::max(0, static_cast<int>(std::floor((q.y() - r - w.ymin) / sy)));
  r1 = std::min(ncy_ - 1,
                static_cast<int>(std::floor((q.y() + r - w.ymin) / sy)));
  if (c1 < c0) { c0 = 0; c1 = -1; }
  if (r1 < r0) { r0 = 0; r1 = -1; }
}

std::vector<std::size_t> NeighborIndex::radius_query(const Eigen::Vector2d& q,
                                                     double r) const {
  std::vector<std::size_t> out;
  for_each_in_radius(q, r, [&](std::size_t i, double) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

double NeighborIndex::nearest_mark_weighted(const Eigen::Vector2d& q,
                                            std::int64_t exclude_id) const {
  const double inf = std::numeric_limits<double>::infinity();
  if (pattern_->empty()) return inf;
  const Window& w = pattern_->window();
  // Expanding search: a point beyond radius R has weighted distance
  // > R / max_mark, so we can stop once best <= R / max_mark.
  const double sx = w.width() / ncx_, sy = w.height() / ncy_;
  double R = std::max(sx, sy);
  const double Rmax = w.diagonal() + (q - Eigen::Vector2d(w.xmin, w.ymin))
                                         .norm();  // covers q outside w too
  double best = inf;
  while (true) {
    best = inf;
    for_each_in_radius(q, R, [&](std::size_t i, double d2) {
      const auto& p = pattern_->points()[i];
      if (p.id == exclude_id) return;
      best = std::min(best, std::sqrt(d2) / p.m);
    });
    if (best <= R / max_mark_) return best;
    if (R > Rmax) return best;  // grid exhausted
    R *= 2.0;
  }
}

std::vector<MarkedPoint> radius_query(const NeighborIndex& index,
                                      const Eigen::Vector2d& u, double r) {
  std::vector<MarkedPoint> out;
  for (std::size_t i : index.radius_query(u, r))
    out.push_back(index.pattern()[i]);
  return out;
}

double nearest_mark_weighted_distance(const MarkedPoint& x,
                                      const NeighborIndex& index) {
  return index.nearest_mark_weighted(x.u, x.id);
}

}  // namespace forestcl
