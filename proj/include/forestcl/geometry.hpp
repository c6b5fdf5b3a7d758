#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "forestcl/errors.hpp"

namespace forestcl {

// Rectangular observation window, coordinates in metres. Closed: points
// exactly on the boundary belong to the window.
struct Window {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

  Window() = default;
  Window(double x0, double x1, double y0, double y1)
      : xmin(x0), xmax(x1), ymin(y0), ymax(y1) {
    if (!(xmax > xmin) || !(ymax > ymin))
      throw ConfigError("Window: need xmax > xmin and ymax > ymin");
  }

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  double diagonal() const { return std::hypot(width(), height()); }

  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
  bool operator==(const Window& o) const {
    return xmin == o.xmin && xmax == o.xmax && ymin == o.ymin && ymax == o.ymax;
  }
};

// A tree: persistent id, planar location (metres), positive mark
// (e.g. diameter at breast height), species index in 1..p.
struct MarkedPoint {
  std::int64_t id = 0;
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  double m = 1.0;
  int species = 1;
};

inline double sq_dist(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - b).squaredNorm();
}

// Immutable marked point pattern on a window. Ids are unique within the
// pattern; all locations lie inside the (closed) window.
class PointPattern {
 public:
  PointPattern() = default;
  PointPattern(std::vector<MarkedPoint> pts, const Window& w);

  const Window& window() const { return window_; }
  const std::vector<MarkedPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const MarkedPoint& operator[](std::size_t i) const { return points_[i]; }

  bool contains_id(std::int64_t id) const;

 private:
  std::vector<MarkedPoint> points_;
  Window window_{0, 1, 0, 1};
  std::vector<std::int64_t> sorted_ids_;  // for membership tests
};

// Recruits = in current, not in previous; deaths = in previous, not in
// current. Membership is judged by persistent id.
struct SetDifference {
  PointPattern recruits;
  PointPattern deaths;
};
SetDifference set_difference(const PointPattern& current,
                             const PointPattern& previous);

// Uniform-grid spatial index over a pattern; supports exact radius
// queries and nearest mark-weighted distance queries. Built once per
// pattern, read-only afterwards.
class NeighborIndex {
 public:
  explicit NeighborIndex(const PointPattern& pattern);

  const PointPattern& pattern() const { return *pattern_; }

  // Indices (into pattern.points()) of points with ||u - q|| <= r,
  // in increasing index order.
  std::vector<std::size_t> radius_query(const Eigen::Vector2d& q,
                                        double r) const;

  // Visit every point with ||u - q|| <= r; f(i, d2) receives the point
  // index and squared distance. Avoids allocation in hot loops.
  template <class F>
  void for_each_in_radius(const Eigen::Vector2d& q, double r, F&& f) const {
    if (r < 0) throw ConfigError("radius_query: negative radius");
    const double r2 = r * r;
    int c0, c1, r0, r1;
    cell_range(q, r, c0, c1, r0, r1);
    for (int cy = r0; cy <= r1; ++cy)
      for (int cx = c0; cx <= c1; ++cx)
        for (std::size_t i : cells_[cell_id(cx, cy)]) {
          const double d2 = sq_dist(pattern_->points()[i].u, q);
          if (d2 <= r2) f(i, d2);
        }
  }

  // min over points (u', m') with id != exclude_id of ||u' - q|| / m';
  // +infinity for an empty (or fully excluded) pattern.
  double nearest_mark_weighted(const Eigen::Vector2d& q,
                               std::int64_t exclude_id) const;

 private:
  int cell_id(int cx, int cy) const { return cy * ncx_ + cx; }
  void cell_range(const Eigen::Vector2d& q, double r, int& c0, int& c1,
                  int& r0, int& r1) const;

  const PointPattern* pattern_ = nullptr;
  double cell_ = 1.0;
  int ncx_ = 1, ncy_ = 1;
  double max_mark_ = 1.0;
  std::vector<std::vector<std::size_t>> cells_;
};

std::vector<MarkedPoint> radius_query(const NeighborIndex& index,
                                      const Eigen::Vector2d& u, double r);

// Mark-weighted nearest distance from x to pattern \ {x} (exclusion by
// id); +infinity for an empty pattern.
double nearest_mark_weighted_distance(const MarkedPoint& x,
                                      const NeighborIndex& index);

}  // namespace forestcl
