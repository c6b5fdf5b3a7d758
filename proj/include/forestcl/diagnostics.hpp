#pragma once

#include <vector>

#include "forestcl/geometry.hpp"

namespace forestcl {

// A sampled diagnostic curve: y(i) evaluated at x(i). `unreliable` marks
// abscissae where the estimator is known to be biased (pcf at r <= bandwidth);
// empty variogram bins come back as NaN.
struct Curve {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<bool> unreliable;
};

// Stoyan-style default bandwidth 0.15 * sqrt(|W| / n).
double pcf_default_bandwidth(const Window& w, std::size_t n);

// Kernel pair-correlation estimator with Epanechnikov kernel and
// translation edge correction:
//   g(r) = sum_{x != x'} k_b(||u-u'|| - r) /
//          (2 pi r zeta(x) zeta(x') |W cap W_{u-u'}|).
// `intensity` holds zeta at each point of `pattern`, in pattern order.
Curve pcf_estimate(const PointPattern& pattern,
                   const std::vector<double>& intensity, double bandwidth,
                   const std::vector<double>& rgrid);

// Empirical semivariogram of residuals r_i at locations u_i:
//   gamma(h) = 0.5 * mean over pairs with ||u_i-u_j|| in h +- tol
//              of (r_i - r_j)^2.
Curve indicator_variogram(const std::vector<Eigen::Vector2d>& points,
                          const std::vector<double>& residuals,
                          const std::vector<double>& hgrid, double tol);

}  // namespace forestcl
