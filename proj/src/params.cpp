#include "forestcl/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "forestcl/errors.hpp"

namespace forestcl {

namespace {
void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite())
    throw ConfigError(std::string(what) + ": non-finite parameter value");
}
}  // namespace

Eigen::VectorXd RecruitParams::pack(const DesignLayout& layout) const {
  if (layout.include_mark)
    throw ConfigError("RecruitParams: recruit layout cannot include a mark term");
  if (beta0.size() != layout.n_blocks || beta.size() != layout.q ||
      gamma.size() != layout.p)
    throw ConfigError("RecruitParams: dimensions do not match layout");
  check_finite(beta0, "RecruitParams");
  check_finite(beta, "RecruitParams");
  check_finite(gamma, "RecruitParams");
  Eigen::VectorXd v(layout.dim());
  v << beta0, beta, gamma;
  return v;
}

RecruitParams RecruitParams::unpack(const Eigen::VectorXd& v,
                                    const DesignLayout& layout) {
  if (v.size() != layout.dim() || layout.include_mark)
    throw ConfigError("RecruitParams::unpack: size/layout mismatch");
  RecruitParams p;
  p.beta0 = v.head(layout.n_blocks);
  p.beta = v.segment(layout.n_blocks, layout.q);
  p.gamma = v.tail(layout.p);
  return p;
}

Eigen::VectorXd DeathParams::pack(const DesignLayout& layout) const {
  if (beta0.size() != layout.n_blocks || beta.size() != layout.q ||
      gamma.size() != layout.p)
    throw ConfigError("DeathParams: dimensions do not match layout");
  check_finite(beta0, "DeathParams");
  check_finite(beta, "DeathParams");
  check_finite(gamma, "DeathParams");
  if (!std::isfinite(alpha)) throw ConfigError("DeathParams: alpha not finite");
  Eigen::VectorXd v(layout.dim());
  if (layout.include_mark)
    v << beta0, alpha, beta, gamma;
  else
    v << beta0, beta, gamma;
  return v;
}

DeathParams DeathParams::unpack(const Eigen::VectorXd& v,
                                const DesignLayout& layout) {
  if (v.size() != layout.dim())
    throw ConfigError("DeathParams::unpack: size mismatch");
  DeathParams p;
  p.beta0 = v.head(layout.n_blocks);
  int off = layout.n_blocks;
  if (layout.include_mark) p.alpha = v(off++);
  p.beta = v.segment(off, layout.q);
  p.gamma = v.tail(layout.p);
  return p;
}

MarkDensity MarkDensity::point_mass(double m) {
  if (!(m > 0)) throw ConfigError("MarkDensity: point mass must be > 0");
  MarkDensity d;
  d.point_ = m;
  return d;
}

MarkDensity MarkDensity::histogram(std::vector<double> edges,
                                   std::vector<double> weights) {
  if (edges.size() < 2 || weights.size() + 1 != edges.size())
    throw ConfigError("MarkDensity: need B+1 edges for B weights");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (!(edges[i + 1] > edges[i]))
      throw ConfigError("MarkDensity: edges must be strictly increasing");
  if (!(edges.front() > 0))
    throw ConfigError("MarkDensity: marks must be positive");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-8)
    throw ConfigError("MarkDensity: histogram weights must sum to 1");
  MarkDensity d;
  d.edges_ = std::move(edges);
  d.weights_ = std::move(weights);
  d.cum_.resize(d.weights_.size());
  std::partial_sum(d.weights_.begin(), d.weights_.end(), d.cum_.begin());
  d.cum_.back() = 1.0;
  return d;
}

double MarkDensity::density(double m) const {
  if (is_point_mass()) return m == point_ ? 1.0 : 0.0;
  for (std::size_t b = 0; b < weights_.size(); ++b)
    if (m >= edges_[b] && m < edges_[b + 1])
      return weights_[b] / (edges_[b + 1] - edges_[b]);
  return 0.0;
}

double MarkDensity::sample(std::mt19937_64& rng) const {
  if (is_point_mass()) return point_;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  std::size_t b = 0;
  while (b + 1 < cum_.size() && u > cum_[b]) ++b;
  const double lo = edges_[b], hi = edges_[b + 1];
  return lo + unif(rng) * (hi - lo);
}

void write_params(const Eigen::VectorXd& theta, const DesignLayout& layout,
                  ModelKind kind, const std::string& path) {
  if (theta.size() != layout.dim())
    throw ConfigError("write_params: size mismatch");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write parameter file: " + path);
  char buf[64];
  for (int i = 0; i < theta.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", theta(i));
    out << layout.name_of(i, kind) << ' ' << i << ' ' << buf << '\n';
  }
}

Eigen::VectorXd read_params(const DesignLayout& layout, ModelKind kind,
                            const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parameter file: " + path);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(
      layout.dim(), std::numeric_limits<double>::quiet_NaN());
  std::string name;
  int idx;
  double value;
  while (in >> name >> idx >> value) {
    if (idx < 0 || idx >= layout.dim())
      throw DataError("parameter file " + path + ": index " +
                      std::to_string(idx) + " out of range");
    if (name != layout.name_of(idx, kind))
      throw DataError("parameter file " + path + ": name '" + name +
                      "' does not match layout entry '" +
                      layout.name_of(idx, kind) + "'");
    theta(idx) = value;
  }
  if (!theta.allFinite())
    throw DataError("parameter file " + path + ": missing entries");
  return theta;
}

}  // namespace forestcl
