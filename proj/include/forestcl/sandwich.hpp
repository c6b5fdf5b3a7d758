#pragma once

#include <Eigen/Dense>

#include "forestcl/model.hpp"

namespace forestcl {

// Uniform kernel 1[||u - u'|| <= omega] limiting which point pairs enter
// the variability estimator.
struct TruncationKernel {
  double omega = 0.0;

  TruncationKernel() = default;
  explicit TruncationKernel(double w) : omega(w) {
    if (omega < 0) throw ConfigError("TruncationKernel: omega must be >= 0");
  }
};

// Sensitivity estimates: recruits sum design design^T * zeta rho0 /
// (zeta + rho0)^2 over B_k u Y_k, deaths sum design design^T p (1 - p);
// both reduce to the logistic weight p(1-p) of the assembled problem.
Eigen::MatrixXd sensitivity(const Assembled& a, const Eigen::VectorXd& theta);

Eigen::MatrixXd sensitivity_recruits(const Eigen::VectorXd& theta,
                                     const RecruitData& data,
                                     const InfluenceConfig& cfg,
                                     const DesignLayout& layout);
Eigen::MatrixXd sensitivity_deaths(const Eigen::VectorXd& theta,
                                   const DeathData& data,
                                   const InfluenceConfig& cfg,
                                   const DesignLayout& layout);

// Variability estimates. Recruits: S-hat plus the truncated pair sum
// over distinct pairs (x != x'); deaths: the truncated pair sum over all
// pairs including x = x'. Both are numerically symmetrized.
Eigen::MatrixXd variability_recruits(const Assembled& a,
                                     const Eigen::VectorXd& theta,
                                     const TruncationKernel& kernel);
Eigen::MatrixXd variability_deaths(const Assembled& a,
                                   const Eigen::VectorXd& theta,
                                   const TruncationKernel& kernel);

Eigen::MatrixXd variability_recruits(const Eigen::VectorXd& theta,
                                     const RecruitData& data,
                                     const InfluenceConfig& cfg,
                                     const DesignLayout& layout,
                                     const TruncationKernel& kernel);
Eigen::MatrixXd variability_deaths(const Eigen::VectorXd& theta,
                                   const DeathData& data,
                                   const InfluenceConfig& cfg,
                                   const DesignLayout& layout,
                                   const TruncationKernel& kernel);

struct SandwichResult {
  Eigen::MatrixXd S;
  Eigen::MatrixXd V;
  Eigen::MatrixXd cov;   // S^-1 V S^-T via symmetric solves
  Eigen::VectorXd se;    // sqrt(diag(cov))
  Eigen::VectorXd z;     // theta / se
  Eigen::VectorXd pvalue;
  Eigen::VectorXd ci_lo, ci_hi;
  double level = 0.95;
  double omega = 0.0;
};

// Godambe covariance and Gaussian confidence intervals. Throws
// NumericalError when S is not positive definite to tolerance
// 1e-10 * ||S||, naming the null direction.
SandwichResult godambe(const Eigen::MatrixXd& S, const Eigen::MatrixXd& V,
                       const Eigen::VectorXd& theta, double level,
                       double omega);

// Standard normal quantile and upper tail, to near machine precision.
double normal_quantile(double p);
double normal_cdf(double x);

}  // namespace forestcl
