#include "forestcl/sandwich.hpp"

#include <cmath>
#include <sstream>

namespace forestcl {

namespace {

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// Pattern over assembled row locations for radius queries.
PointPattern location_pattern(const AssembledCensus& c, const Window& w) {
  std::vector<MarkedPoint> pts;
  pts.reserve(c.locations.size());
  for (std::size_t i = 0; i < c.locations.size(); ++i) {
    MarkedPoint p;
    p.id = static_cast<std::int64_t>(i);
    p.u = c.locations[i];
    pts.push_back(p);
  }
  return PointPattern(std::move(pts), w);
}

// Truncated pair sum sum_{i,j: ||u_i-u_j|| <= omega} c_i c_j X_i X_j^T,
// with or without the i = j diagonal, symmetrized.
Eigen::MatrixXd pair_sum(const Assembled& a, const Eigen::VectorXd& coef_all,
                         double omega, bool include_diagonal) {
  const int d = a.layout.dim();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  int row0 = 0;
  for (const auto& c : a.censuses) {
    const int n = static_cast<int>(c.X.rows());
    const PointPattern pat = location_pattern(c, a.window);
    const NeighborIndex index(pat);
    Eigen::VectorXd s(d);
    for (int i = 0; i < n; ++i) {
      s.setZero();
      index.for_each_in_radius(c.locations[i], omega,
                               [&](std::size_t j, double) {
                                 s += coef_all(row0 + static_cast<int>(j)) *
                                      c.X.row(static_cast<int>(j)).transpose();
                               });
      if (!include_diagonal) s -= coef_all(row0 + i) * c.X.row(i).transpose();
      M.noalias() += coef_all(row0 + i) * c.X.row(i).transpose() * s.transpose();
    }
    row0 += n;
  }
  return 0.5 * (M + M.transpose());
}

// Score residuals y - p, the per-row weights of the pair sum for both
// models. (For the logistic recruit device this is the weight that keeps
// the cross-product sum unbiased for the extra-Poisson variability term;
// it equals h/zeta on recruits and -h/rho on dummies.)
Eigen::VectorXd all_coefs(const Assembled& a, const Eigen::VectorXd& theta) {
  Eigen::VectorXd coef(static_cast<int>(a.n_rows()));
  int row0 = 0;
  for (const auto& c : a.censuses) {
    const Eigen::VectorXd eta = c.X * theta + c.offset;
    for (int i = 0; i < eta.size(); ++i)
      coef(row0 + i) = c.y(i) - sigmoid(eta(i));
    row0 += static_cast<int>(eta.size());
  }
  return coef;
}

}  // namespace

Eigen::MatrixXd sensitivity(const Assembled& a, const Eigen::VectorXd& theta) {
  if (a.n_rows() == 0)
    throw ConfigError("sensitivity: no points in any census");
  const int d = a.layout.dim();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : a.censuses) {
    const Eigen::VectorXd eta = c.X * theta + c.offset;
    Eigen::VectorXd w(eta.size());
    for (int i = 0; i < eta.size(); ++i) {
      const double p = sigmoid(eta(i));
      w(i) = p * (1.0 - p);
    }
    S.noalias() += c.X.transpose() * w.asDiagonal() * c.X;
  }
  S = 0.5 * (S + S.transpose());
  // Rank check at 1e-10 of the largest eigenvalue; name the null direction.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const double tol = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() <= tol) {
    std::ostringstream oss;
    oss << "sensitivity matrix rank deficient; null direction ("
        << es.eigenvectors().col(0).transpose() << ")";
    throw NumericalError(oss.str());
  }
  return S;
}

Eigen::MatrixXd sensitivity_recruits(const Eigen::VectorXd& theta,
                                     const RecruitData& data,
                                     const InfluenceConfig& cfg,
                                     const DesignLayout& layout) {
  return sensitivity(assemble_recruits(data, cfg, layout), theta);
}

Eigen::MatrixXd sensitivity_deaths(const Eigen::VectorXd& theta,
                                   const DeathData& data,
                                   const InfluenceConfig& cfg,
                                   const DesignLayout& layout) {
  return sensitivity(assemble_deaths(data, cfg, layout), theta);
}

Eigen::MatrixXd variability_recruits(const Assembled& a,
                                     const Eigen::VectorXd& theta,
                                     const TruncationKernel& kernel) {
  const Eigen::MatrixXd S = sensitivity(a, theta);
  const Eigen::VectorXd coef = all_coefs(a, theta);
  return S + pair_sum(a, coef, kernel.omega, /*include_diagonal=*/false);
}

Eigen::MatrixXd variability_deaths(const Assembled& a,
                                   const Eigen::VectorXd& theta,
                                   const TruncationKernel& kernel) {
  const Eigen::VectorXd coef = all_coefs(a, theta);
  return pair_sum(a, coef, kernel.omega, /*include_diagonal=*/true);
}

Eigen::MatrixXd variability_recruits(const Eigen::VectorXd& theta,
                                     const RecruitData& data,
                                     const InfluenceConfig& cfg,
                                     const DesignLayout& layout,
                                     const TruncationKernel& kernel) {
  return variability_recruits(assemble_recruits(data, cfg, layout), theta,
                              kernel);
}

Eigen::MatrixXd variability_deaths(const Eigen::VectorXd& theta,
                                   const DeathData& data,
                                   const InfluenceConfig& cfg,
                                   const DesignLayout& layout,
                                   const TruncationKernel& kernel) {
  return variability_deaths(assemble_deaths(data, cfg, layout), theta, kernel);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw ConfigError("normal_quantile: p must be in (0, 1)");
  // Acklam's rational approximation, then one Halley refinement against
  // erfc-based CDF; relative error well below 1e-12.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

SandwichResult godambe(const Eigen::MatrixXd& S, const Eigen::MatrixXd& V,
                       const Eigen::VectorXd& theta, double level,
                       double omega) {
  if (S.rows() != S.cols() || V.rows() != V.cols() || S.rows() != V.rows() ||
      S.rows() != theta.size())
    throw ConfigError("godambe: dimension mismatch");
  if (!(level > 0) || !(level < 1))
    throw ConfigError("godambe: level must be in (0, 1)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const double maxev = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() <= 1e-10 * maxev) {
    std::ostringstream oss;
    oss << "godambe: S not positive definite; null direction ("
        << es.eigenvectors().col(0).transpose() << ")";
    throw NumericalError(oss.str());
  }
  SandwichResult r;
  r.S = S;
  r.V = V;
  r.level = level;
  r.omega = omega;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  const Eigen::MatrixXd SinvV = ldlt.solve(V);
  Eigen::MatrixXd cov = ldlt.solve(SinvV.transpose()).transpose();
  r.cov = 0.5 * (cov + cov.transpose());
  const int d = static_cast<int>(theta.size());
  r.se.resize(d);
  r.z.resize(d);
  r.pvalue.resize(d);
  r.ci_lo.resize(d);
  r.ci_hi.resize(d);
  const double zq = normal_quantile(1.0 - (1.0 - level) / 2.0);
  for (int i = 0; i < d; ++i) {
    const double var = r.cov(i, i);
    r.se(i) = var > 0 ? std::sqrt(var) : 0.0;
    r.z(i) = r.se(i) > 0 ? theta(i) / r.se(i) : 0.0;
    r.pvalue(i) = 2.0 * normal_cdf(-std::abs(r.z(i)));
    r.ci_lo(i) = theta(i) - zq * r.se(i);
    r.ci_hi(i) = theta(i) + zq * r.se(i);
  }
  return r;
}

}  // namespace forestcl
