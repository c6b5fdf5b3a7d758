#pragma once

#include "forestcl/errors.hpp"

namespace forestcl {

// Matern covariance: variance sigma2, smoothness nu, correlation scale
// xi (metres). c(r) = sigma2 * 2^{1-nu}/Gamma(nu) * (r/xi)^nu * K_nu(r/xi),
// with c(0) = sigma2 by continuity.
struct MaternParams {
  double sigma2 = 1.0;
  double nu = 0.5;
  double xi = 1.0;

  MaternParams() = default;
  MaternParams(double s2, double smoothness, double scale)
      : sigma2(s2), nu(smoothness), xi(scale) {
    if (!(sigma2 > 0) || !(nu > 0) || !(xi > 0))
      throw ConfigError("MaternParams: sigma2, nu, xi must be positive");
  }
};

double matern_cov(double r, const MaternParams& p);

}  // namespace forestcl
