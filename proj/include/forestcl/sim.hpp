#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "forestcl/grf.hpp"
#include "forestcl/model.hpp"

namespace forestcl {

// Full generative configuration: initial patterns and K generations of
// LGCP recruits and field-correlated deaths for n_species species.
struct SimConfig {
  Window window{0, 500, 0, 250};
  int K = 10;
  double grid_cellsize = 1.0;
  int n_species = 2;

  std::vector<RecruitParams> recruit;  // per species
  std::vector<DeathParams> death;
  DesignLayout recruit_layout;  // shared by all species
  DesignLayout death_layout;

  MaternParams lgcp_field{1.0, 1.75, 4.0};   // log-field of the recruit LGCP
  MaternParams death_field{1.0, 0.5, 7.0};   // latent field behind deaths
  InfluenceConfig influence;
  MarkDensity marks = MarkDensity::point_mass(1.0);

  // Covariates: either sampled GRFs (one MaternParams per covariate,
  // redrawn per replicate) or fixed rasters.
  std::vector<MaternParams> covariate_fields;
  std::vector<std::shared_ptr<const RasterField>> covariate_rasters;

  std::uint64_t seed = 0;

  int n_covariates() const {
    return static_cast<int>(covariate_fields.empty()
                                ? covariate_rasters.size()
                                : covariate_fields.size());
  }

  // The simulation-study defaults: two species, shared intercepts,
  // dispersal influences (psi = 6) for recruits and competition indices
  // (kappa = 10) for deaths, unit marks, two GRF covariates.
  static SimConfig study_defaults(const Window& w, int K, std::uint64_t seed);
};

struct ReplicateResult {
  // census[k][l] = pattern of species l+1 at census k, k = 0..K.
  std::vector<std::vector<PointPattern>> census;
  std::vector<std::shared_ptr<const RasterField>> covariates;
  std::vector<std::string> events;

  std::shared_ptr<const HistoryFrame> frame_at(int census_index) const;
};

// One-interval pieces (also used standalone by tests and the CLI).
// Recruits: per grid cell a Poisson count with mean
// zeta(cell center) * exp(G - sigma^2/2) * cellarea, uniform within-cell
// jitter, marks from f. Deterministic given seed.
PointPattern simulate_lgcp_recruits(const HistoryFrame& frame,
                                    const RecruitParams& theta,
                                    const GrfSampler& field,
                                    const InfluenceConfig& cfg,
                                    const DesignLayout& layout,
                                    const MarkDensity& f, std::uint64_t seed,
                                    std::int64_t id_base, int species);

// Deaths: tau = logit(Phi(U)) at the tree's grid cell is marginally
// standard logistic, so P(I = 1) = logistic(eta) with spatial dependence
// inherited from U.
std::vector<std::uint8_t> simulate_deaths(const HistoryFrame& frame,
                                          int species,
                                          const DeathParams& theta,
                                          const GrfSampler& field,
                                          const InfluenceConfig& cfg,
                                          const DesignLayout& layout,
                                          std::uint64_t seed);

// Caches the circulant-embedding spectra so that replicates cost one FFT
// per field draw. Thread-safe for concurrent run_replicate calls.
class SimEngine {
 public:
  explicit SimEngine(SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  ReplicateResult run_replicate(int rep) const;

  const GrfSampler& lgcp_sampler() const { return *lgcp_; }
  const GrfSampler& death_sampler() const { return *death_; }

 private:
  SimConfig cfg_;
  std::unique_ptr<GrfSampler> lgcp_;
  std::unique_ptr<GrfSampler> death_;
  std::vector<std::unique_ptr<GrfSampler>> covariate_samplers_;
};

ReplicateResult run_replicate(const SimConfig& cfg, int rep);

}  // namespace forestcl
