#include "forestcl/matern.hpp"

#include <cmath>

namespace forestcl {

double matern_cov(double r, const MaternParams& p) {
  if (r < 0) throw ConfigError("matern_cov: negative distance");
  if (r == 0) return p.sigma2;
  const double s = r / p.xi;
  // K_nu underflows for large arguments; the covariance is then 0.
  if (s > 700.0) return 0.0;
  const double c = std::pow(2.0, 1.0 - p.nu) / std::tgamma(p.nu) *
                   std::pow(s, p.nu) * std::cyl_bessel_k(p.nu, s);
  return p.sigma2 * c;
}

}  // namespace forestcl
