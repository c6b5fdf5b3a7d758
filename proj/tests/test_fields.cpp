#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "forestcl/grf.hpp"
#include "forestcl/matern.hpp"
#include "forestcl/raster.hpp"

using namespace forestcl;

namespace {

// Independent Bessel oracle: K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt,
// evaluated by Simpson's rule on [0, 20] (integrand decays like
// exp(-x e^t / 2), so the tail beyond t = 20 is negligible for x >= 0.05).
double bessel_k_integral(double nu, double x) {
  const int n = 40000;  // even
  const double a = 0.0, b = 20.0, h = (b - a) / n;
  auto f = [&](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(nu * t); };
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double matern_oracle(double r, const MaternParams& p) {
  if (r == 0.0) return p.sigma2;
  const double s = r / p.xi;
  return p.sigma2 * std::pow(2.0, 1.0 - p.nu) / std::tgamma(p.nu) *
         std::pow(s, p.nu) * bessel_k_integral(p.nu, s);
}

}  // namespace

TEST_CASE("matern covariance closed forms") {
  CHECK(matern_cov(0.0, MaternParams(2.5, 1.75, 4)) == doctest::Approx(2.5));
  // nu = 1/2 is the exponential covariance exp(-r/xi).
  CHECK(matern_cov(7.0, MaternParams(1, 0.5, 7)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(matern_cov(14.0, MaternParams(1, 0.5, 7)) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
  // Frozen value for the simulation-study field at r = xi:
  // (2^-0.75 / Gamma(1.75)) * K_1.75(1) with K_1.75(1) = 1.20440272549246.
  CHECK(matern_cov(4.0, MaternParams(1, 1.75, 4)) ==
        doctest::Approx(0.7792093838245512).epsilon(1e-9));
}

TEST_CASE("matern covariance against integral oracle at 20 points") {
  const MaternParams grids[] = {MaternParams(1, 0.5, 7),
                                MaternParams(1, 1.75, 4),
                                MaternParams(1.0 / 9.0, 0.5, 28),
                                MaternParams(1.0 / 9.0, 1.75, 16)};
  for (const auto& p : grids) {
    for (int i = 1; i <= 5; ++i) {
      const double r = 0.8 * i * p.xi;
      CHECK(matern_cov(r, p) ==
            doctest::Approx(matern_oracle(r, p)).epsilon(1e-8));
    }
  }
  CHECK(matern_cov(1e5, MaternParams(1, 1.75, 4)) == 0.0);  // deep tail
  CHECK_THROWS_AS(MaternParams(0, 1, 1), ConfigError);
  CHECK_THROWS_AS(MaternParams(1, -1, 1), ConfigError);
}

TEST_CASE("raster lookup semantics") {
  Window w(0, 4, 0, 2);
  Eigen::MatrixXd v(2, 4);
  // row 0 = north (y in [1,2)), row 1 = south.
  v << 1, 2, 3, 4, 5, 6, 7, 8;
  RasterField f(w, 2, 4, 1.0, v);
  CHECK(f.lookup({0.5, 1.5}) == 1.0);  // NW cell center
  CHECK(f.lookup({3.5, 0.5}) == 8.0);  // SE cell center
  // Floor rule on interior shared edges.
  CHECK(f.lookup({1.0, 0.5}) == 6.0);
  CHECK(f.lookup({0.5, 1.0}) == 1.0);
  // Closed east/north boundary clamps into the last cell.
  CHECK(f.lookup({4.0, 2.0}) == 4.0);
  CHECK_THROWS_AS(f.lookup({4.5, 1.0}), DataError);
  // Piecewise constant within a cell.
  CHECK(f.lookup({2.2, 1.7}) == f.lookup({2.9, 1.1}));
  CHECK(RasterField::constant(w, 0.5, 3.5).lookup({1.23, 0.77}) == 3.5);
}

TEST_CASE("ascii grid round trip is bit exact") {
  Window w(10, 16, -4, 0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd v(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) v(i, j) = g(rng) * 1e3;
  RasterField f(w, 2, 3, 2.0, v);
  const auto path =
      (std::filesystem::temp_directory_path() / "fcl_grid_test.asc").string();
  write_ascii_grid(f, path);
  RasterField back = read_ascii_grid(path);
  CHECK(back.nrows() == 2);
  CHECK(back.ncols() == 3);
  CHECK(back.cellsize() == 2.0);
  CHECK(back.window() == w);
  CHECK((back.values() - f.values()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("grf determinism and degenerate variance") {
  Window w(0, 32, 0, 32);
  GrfSampler s(w, 1.0, MaternParams(1, 1.75, 4));
  RasterField a = s.sample(123), b = s.sample(123), c = s.sample(124);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.values() - c.values()).cwiseAbs().maxCoeff() > 1e-6);
  // sigma^2 -> 0: field vanishes.
  RasterField z = simulate_grf(w, 1.0, MaternParams(1e-18, 1.0, 5.0), 7);
  CHECK(z.values().cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("grf marginal moments and covariance match the model") {
  Window w(0, 32, 0, 32);
  const MaternParams p(1.0, 0.5, 3.0);
  GrfSampler s(w, 1.0, p);
  const int R = 4000;
  // Track two cell pairs at lags 2 and 5 along a row.
  Eigen::Vector2d u0(10.5, 16.5), u2(12.5, 16.5), u5(15.5, 16.5);
  std::vector<double> x0, x2, x5;
  for (int rep = 0; rep < R; ++rep) {
    RasterField f = s.sample(1000 + rep);
    x0.push_back(f.lookup(u0));
    x2.push_back(f.lookup(u2));
    x5.push_back(f.lookup(u5));
  }
  auto mean = [&](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    return m / v.size();
  };
  const double m0 = mean(x0);
  CHECK(std::abs(m0) < 4.0 / std::sqrt(static_cast<double>(R)));
  double var = 0;
  for (double x : x0) var += (x - m0) * (x - m0);
  var /= (R - 1);
  CHECK(var == doctest::Approx(p.sigma2).epsilon(0.10));
  auto cov_with = [&](const std::vector<double>& v, double lag) {
    const double mv = mean(v);
    std::vector<double> prod;
    for (int i = 0; i < R; ++i) prod.push_back((x0[i] - m0) * (v[i] - mv));
    const double c = mean(prod);
    double s2 = 0;
    for (double q : prod) s2 += (q - c) * (q - c);
    const double se = std::sqrt(s2 / (R - 1) / R);
    CHECK(std::abs(c - matern_cov(lag, p)) < 4.0 * se);
  };
  cov_with(x2, 2.0);
  cov_with(x5, 5.0);
}
