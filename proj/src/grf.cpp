#include "forestcl/grf.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <iostream>
#include <mutex>
#include <vector>

#include "forestcl/rng.hpp"

namespace forestcl {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Smallest 2^a 3^b 5^c >= n; keeps FFTW transforms fast.
int next_smooth(int n) {
  auto smooth = [](int v) {
    for (int f : {2, 3, 5})
      while (v % f == 0) v /= f;
    return v == 1;
  };
  while (!smooth(n)) ++n;
  return n;
}

}  // namespace

struct GrfSampler::Impl {
  int nr = 0, nc = 0;    // target grid
  int Mr = 0, Mc = 0;    // embedding torus
  std::vector<double> sqrt_lambda;  // Mr*Mc, row-major
  fftw_plan plan = nullptr;         // forward c2c on the embedding grid
  fftw_complex* plan_buf = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    if (plan_buf) fftw_free(plan_buf);
  }
};

GrfSampler::GrfSampler(const Window& window, double cellsize,
                       const MaternParams& p)
    : impl_(new Impl), window_(window), cellsize_(cellsize), params_(p) {
  if (!(cellsize > 0)) throw ConfigError("GrfSampler: cellsize must be > 0");
  auto& im = *impl_;
  im.nc = std::max(1, static_cast<int>(std::lround(window.width() / cellsize)));
  im.nr = std::max(1, static_cast<int>(std::lround(window.height() / cellsize)));
  if (static_cast<long long>(im.nc) * im.nr > 2'000'000)
    throw ConfigError("GrfSampler: grid exceeds 2e6 cells");
  im.Mc = next_smooth(2 * im.nc);
  im.Mr = next_smooth(2 * im.nr);
  const std::size_t M = static_cast<std::size_t>(im.Mr) * im.Mc;

  fftw_complex* buf;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf = fftw_alloc_complex(M);
    im.plan_buf = buf;
    im.plan = fftw_plan_dft_2d(im.Mr, im.Mc, buf, buf, FFTW_FORWARD,
                               FFTW_ESTIMATE);
  }

  // Covariance kernel on the torus: wrap-around distances.
  for (int i = 0; i < im.Mr; ++i) {
    const double dy = std::min(i, im.Mr - i) * cellsize;
    for (int j = 0; j < im.Mc; ++j) {
      const double dx = std::min(j, im.Mc - j) * cellsize;
      const std::size_t idx = static_cast<std::size_t>(i) * im.Mc + j;
      buf[idx][0] = matern_cov(std::hypot(dx, dy), p);
      buf[idx][1] = 0.0;
    }
  }
  fftw_execute(im.plan);

  double max_l = 0.0, min_l = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    max_l = std::max(max_l, buf[k][0]);
    min_l = std::min(min_l, buf[k][0]);
  }
  min_eig_ratio_ = (max_l > 0) ? min_l / max_l : 0.0;
  if (min_l < -1e-9 * max_l) {
    clipped_ = true;
    std::cerr << "GrfSampler: circulant embedding spectrum has negative "
                 "eigenvalues (min/max = "
              << min_eig_ratio_ << "); clipping to zero\n";
  }
  im.sqrt_lambda.resize(M);
  for (std::size_t k = 0; k < M; ++k)
    im.sqrt_lambda[k] = std::sqrt(std::max(buf[k][0], 0.0));
}

GrfSampler::~GrfSampler() = default;

RasterField GrfSampler::sample(std::uint64_t seed) const {
  const auto& im = *impl_;
  const std::size_t M = static_cast<std::size_t>(im.Mr) * im.Mc;
  fftw_complex* buf;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf = fftw_alloc_complex(M);
  }

  auto rng = make_rng(seed, 0x67726600 /* stream tag */);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double norm = 1.0 / std::sqrt(static_cast<double>(M));
  for (std::size_t k = 0; k < M; ++k) {
    const double a = gauss(rng), b = gauss(rng);
    buf[k][0] = im.sqrt_lambda[k] * a * norm;
    buf[k][1] = im.sqrt_lambda[k] * b * norm;
  }
  fftw_execute_dft(im.plan, buf, buf);

  // Real part of the top-left nr x nc block is one realization; row 0 of
  // the raster is the northern edge.
  Eigen::MatrixXd vals(im.nr, im.nc);
  for (int i = 0; i < im.nr; ++i)
    for (int j = 0; j < im.nc; ++j)
      vals(im.nr - 1 - i, j) = buf[static_cast<std::size_t>(i) * im.Mc + j][0];
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_free(buf);
  }
  return RasterField(window_, im.nr, im.nc, cellsize_, std::move(vals));
}

RasterField simulate_grf(const Window& window, double cellsize,
                         const MaternParams& p, std::uint64_t seed) {
  return GrfSampler(window, cellsize, p).sample(seed);
}

}  // namespace forestcl
