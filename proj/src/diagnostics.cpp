#include "forestcl/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "forestcl/errors.hpp"

namespace forestcl {

double pcf_default_bandwidth(const Window& w, std::size_t n) {
  if (n == 0) throw ConfigError("pcf_default_bandwidth: empty pattern");
  return 0.15 * std::sqrt(w.area() / static_cast<double>(n));
}

Curve pcf_estimate(const PointPattern& pattern,
                   const std::vector<double>& intensity, double bandwidth,
                   const std::vector<double>& rgrid) {
  if (pattern.size() < 2)
    throw DataError("pcf_estimate: need at least two points");
  if (!(bandwidth > 0)) throw ConfigError("pcf_estimate: bandwidth must be > 0");
  if (intensity.size() != pattern.size())
    throw ConfigError("pcf_estimate: intensity size mismatch");
  for (double z : intensity)
    if (!(z > 0) || !std::isfinite(z))
      throw ConfigError("pcf_estimate: intensities must be strictly positive");
  for (double r : rgrid)
    if (!(r > 0)) throw ConfigError("pcf_estimate: r grid must be positive");

  const Window& w = pattern.window();
  const double width = w.xmax - w.xmin;
  const double height = w.ymax - w.ymin;
  double rmax = 0.0;
  for (double r : rgrid) rmax = std::max(rmax, r);
  const double reach = rmax + bandwidth;

  Curve out;
  out.x = rgrid;
  out.y.assign(rgrid.size(), 0.0);
  out.unreliable.resize(rgrid.size());
  for (std::size_t k = 0; k < rgrid.size(); ++k)
    out.unreliable[k] = (rgrid[k] <= bandwidth);

  const NeighborIndex index(pattern);
  const auto& pts = pattern.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    index.for_each_in_radius(pts[i].u, reach, [&](std::size_t j, double d2) {
      if (j == i) return;  // ordered pairs x != x'
      const double d = std::sqrt(d2);
      const Eigen::Vector2d h = pts[i].u - pts[j].u;
      const double area =
          (width - std::abs(h.x())) * (height - std::abs(h.y()));
      if (!(area > 0)) return;
      const double base = intensity[i] * intensity[j] * area;
      for (std::size_t k = 0; k < rgrid.size(); ++k) {
        const double t = (d - rgrid[k]) / bandwidth;
        if (std::abs(t) >= 1.0) continue;
        const double kern = 0.75 * (1.0 - t * t) / bandwidth;
        out.y[k] += kern / (2.0 * M_PI * rgrid[k] * base);
      }
    });
  }
  return out;
}

Curve indicator_variogram(const std::vector<Eigen::Vector2d>& points,
                          const std::vector<double>& residuals,
                          const std::vector<double>& hgrid, double tol) {
  if (points.size() < 2)
    throw DataError("indicator_variogram: need at least two points");
  if (points.size() != residuals.size())
    throw ConfigError("indicator_variogram: residual size mismatch");
  if (!(tol > 0)) throw ConfigError("indicator_variogram: tol must be > 0");

  Curve out;
  out.x = hgrid;
  out.y.assign(hgrid.size(), std::numeric_limits<double>::quiet_NaN());
  out.unreliable.assign(hgrid.size(), false);

  std::vector<double> sum(hgrid.size(), 0.0);
  std::vector<std::size_t> count(hgrid.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = (points[i] - points[j]).norm();
      const double sq = residuals[i] - residuals[j];
      for (std::size_t k = 0; k < hgrid.size(); ++k) {
        if (std::abs(d - hgrid[k]) <= tol) {
          sum[k] += sq * sq;
          ++count[k];
        }
      }
    }
  }
  for (std::size_t k = 0; k < hgrid.size(); ++k) {
    if (count[k] > 0) out.y[k] = 0.5 * sum[k] / static_cast<double>(count[k]);
    else out.unreliable[k] = true;
  }
  return out;
}

}  // namespace forestcl
