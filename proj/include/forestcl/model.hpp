#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "forestcl/params.hpp"

namespace forestcl {

// Dummy Poisson process: constant spatial intensity rho (points per unit
// area), marks i.i.d. from the mark density. Census k gets an
// independent stream derived from (seed, k).
struct DummyConfig {
  double rho = 1.0;
  std::uint64_t seed = 0;

  DummyConfig() = default;
  DummyConfig(double r, std::uint64_t s) : rho(r), seed(s) {
    if (!(rho > 0)) throw ConfigError("DummyConfig: rho must be > 0");
  }
};

PointPattern sample_dummy(const Window& window, int census, const DummyConfig& cfg,
                          const MarkDensity& f);

// Per-census inputs for the recruit fit: history, recruits B_k, fixed
// dummy pattern Y_k, and the dummy spatial intensity used for Y_k.
struct RecruitCensusData {
  std::shared_ptr<const HistoryFrame> frame;
  PointPattern recruits;
  PointPattern dummies;
  double rho = 1.0;
};
using RecruitData = std::vector<RecruitCensusData>;

// Per-census inputs for the death fit: history, the previous-census
// pattern of the target species, and the death indicator per point.
struct DeathCensusData {
  std::shared_ptr<const HistoryFrame> frame;
  PointPattern previous;
  std::vector<std::uint8_t> died;  // aligned with previous.points()
};
using DeathData = std::vector<DeathCensusData>;

// Conditional recruit intensity (including the mark density factor).
double recruit_intensity(const MarkedPoint& x, const HistoryFrame& frame,
                         const RecruitParams& theta, const MarkDensity& f,
                         const InfluenceConfig& cfg,
                         const DesignLayout& layout);

// Conditional death probability, logistic in the linear predictor.
double death_probability(const MarkedPoint& x, const HistoryFrame& frame,
                         const DeathParams& theta, const InfluenceConfig& cfg,
                         const DesignLayout& layout);

// Design rows, labels, offsets, and locations for one census, shared by
// the score, the solver, and the variance estimators. For recruits the
// rows are B_k then Y_k with labels 1/0 and offset -log(rho); for deaths
// the rows follow previous.points() with the death indicator as label
// and zero offset.
struct AssembledCensus {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd offset;
  std::vector<Eigen::Vector2d> locations;
  int census_index = 0;
};

struct Assembled {
  std::vector<AssembledCensus> censuses;
  DesignLayout layout;
  Window window{0, 1, 0, 1};

  std::size_t n_rows() const;
};

Assembled assemble_recruits(const RecruitData& data, const InfluenceConfig& cfg,
                            const DesignLayout& layout);
Assembled assemble_deaths(const DeathData& data, const InfluenceConfig& cfg,
                          const DesignLayout& layout);

// Composite-likelihood score e(theta) = sum_k e_k(theta); the per-census
// columns are also returned so additivity is exact by construction.
Eigen::VectorXd logistic_score(const Assembled& a, const Eigen::VectorXd& theta,
                               Eigen::MatrixXd* per_census = nullptr);

// Bernoulli composite log-likelihood of the logistic device.
double logistic_loglik(const Assembled& a, const Eigen::VectorXd& theta);

Eigen::VectorXd recruit_score(const Eigen::VectorXd& theta,
                              const RecruitData& data,
                              const InfluenceConfig& cfg,
                              const DesignLayout& layout);
Eigen::VectorXd death_score(const Eigen::VectorXd& theta,
                            const DeathData& data, const InfluenceConfig& cfg,
                            const DesignLayout& layout);

struct FitOptions {
  double tol = 1e-8;  // converged when ||score||_inf <= tol * (1 + ||theta||_inf)
  int max_iter = 50;
};

struct FitResult {
  Eigen::VectorXd theta;
  DesignLayout layout;
  bool converged = false;
  int iterations = 0;
  double score_norm = 0.0;
  Eigen::MatrixXd per_census_scores;  // dim x K, at the solution
  std::vector<std::string> warnings;
};

// Newton with step-halving line search on the Bernoulli objective.
FitResult solve_newton(const Assembled& a, const FitOptions& opts,
                       const Eigen::VectorXd& init);
// Classic IRLS (no line search); same root, used as the dual-route
// solver check.
FitResult solve_irls(const Assembled& a, const FitOptions& opts,
                     const Eigen::VectorXd& init);

FitResult fit_recruits(const RecruitData& data, const InfluenceConfig& cfg,
                       const DesignLayout& layout, const FitOptions& opts = {});
FitResult fit_deaths(const DeathData& data, const InfluenceConfig& cfg,
                     const DesignLayout& layout, const FitOptions& opts = {});

}  // namespace forestcl
