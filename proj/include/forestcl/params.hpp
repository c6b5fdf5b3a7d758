#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "forestcl/design.hpp"

namespace forestcl {

// Recruit model parameters: time-dependent intercepts beta0 (one per
// intercept block), covariate coefficients beta, influence coefficients
// gamma.
struct RecruitParams {
  Eigen::VectorXd beta0;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;

  Eigen::VectorXd pack(const DesignLayout& layout) const;
  static RecruitParams unpack(const Eigen::VectorXd& v,
                              const DesignLayout& layout);
};

// Death model parameters: intercepts, mark coefficient alpha (used only
// when the layout includes the mark), covariate and influence
// coefficients.
struct DeathParams {
  Eigen::VectorXd beta0;
  double alpha = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;

  Eigen::VectorXd pack(const DesignLayout& layout) const;
  static DeathParams unpack(const Eigen::VectorXd& v,
                            const DesignLayout& layout);
};

// Known mark density f: either a point mass (simulation study, m = 1)
// or an empirical histogram density with weights summing to 1.
class MarkDensity {
 public:
  static MarkDensity point_mass(double m);
  static MarkDensity histogram(std::vector<double> edges,
                               std::vector<double> weights);

  double density(double m) const;
  double sample(std::mt19937_64& rng) const;
  bool is_point_mass() const { return edges_.empty(); }

 private:
  double point_ = 1.0;
  std::vector<double> edges_;    // size B+1
  std::vector<double> weights_;  // size B, sums to 1
  std::vector<double> cum_;      // cumulative weights
};

// Key-value parameter file: lines "name index value". Round-trips
// between the fit, variance, and simulate commands.
void write_params(const Eigen::VectorXd& theta, const DesignLayout& layout,
                  ModelKind kind, const std::string& path);
Eigen::VectorXd read_params(const DesignLayout& layout, ModelKind kind,
                            const std::string& path);

}  // namespace forestcl
