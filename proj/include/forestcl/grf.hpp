#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "forestcl/matern.hpp"
#include "forestcl/raster.hpp"

namespace forestcl {

// Stationary zero-mean Gaussian random field sampler on a regular grid,
// using circulant embedding of the Matern covariance on a doubled torus.
// If the embedding spectrum has eigenvalues below -1e-9 * max, they are
// clipped to zero and `clipped()` reports the approximation; small
// negative round-off is clipped silently.
//
// The spectrum is computed once at construction; sample() only costs one
// FFT, so the sampler should be reused when drawing many fields with the
// same covariance. Concurrent sample() calls with distinct seeds are
// safe.
class GrfSampler {
 public:
  GrfSampler(const Window& window, double cellsize, const MaternParams& p);
  ~GrfSampler();
  GrfSampler(const GrfSampler&) = delete;
  GrfSampler& operator=(const GrfSampler&) = delete;

  RasterField sample(std::uint64_t seed) const;

  bool clipped() const { return clipped_; }
  double min_eigenvalue_ratio() const { return min_eig_ratio_; }
  const MaternParams& params() const { return params_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Window window_{0, 1, 0, 1};
  double cellsize_ = 1.0;
  MaternParams params_;
  bool clipped_ = false;
  double min_eig_ratio_ = 0.0;
};

// One-shot convenience wrapper; deterministic given seed.
RasterField simulate_grf(const Window& window, double cellsize,
                         const MaternParams& p, std::uint64_t seed);

}  // namespace forestcl
