#include "forestcl/model.hpp"

#include <cmath>
#include <iostream>
#include <set>

#include "forestcl/rng.hpp"

namespace forestcl {

namespace {

constexpr std::int64_t kDummyIdBase = -(std::int64_t(1) << 40);

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta)), overflow-safe.
double softplus(double eta) {
  if (eta > 30) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

}  // namespace

PointPattern sample_dummy(const Window& window, int census,
                          const DummyConfig& cfg, const MarkDensity& f) {
  auto rng = make_rng(cfg.seed, 0xd0d0, static_cast<std::uint64_t>(census));
  std::poisson_distribution<long long> pois(cfg.rho * window.area());
  const long long n = pois(rng);
  std::uniform_real_distribution<double> ux(window.xmin, window.xmax);
  std::uniform_real_distribution<double> uy(window.ymin, window.ymax);
  std::vector<MarkedPoint> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    MarkedPoint p;
    p.id = kDummyIdBase - i;
    const double x = ux(rng), y = uy(rng);
    p.u = {x, y};
    p.m = f.sample(rng);
    p.species = 0;
    pts.push_back(p);
  }
  return PointPattern(std::move(pts), window);
}

double recruit_intensity(const MarkedPoint& x, const HistoryFrame& frame,
                         const RecruitParams& theta, const MarkDensity& f,
                         const InfluenceConfig& cfg,
                         const DesignLayout& layout) {
  const Eigen::VectorXd d =
      build_design(x, frame, cfg, ModelKind::kRecruit, layout);
  const double eta = d.dot(theta.pack(layout));
  if (eta > 700.0)
    throw NumericalError("recruit_intensity: linear predictor overflow (eta = " +
                         std::to_string(eta) + ")");
  return f.density(x.m) * std::exp(eta);
}

double death_probability(const MarkedPoint& x, const HistoryFrame& frame,
                         const DeathParams& theta, const InfluenceConfig& cfg,
                         const DesignLayout& layout) {
  const Eigen::VectorXd d =
      build_design(x, frame, cfg, ModelKind::kDeath, layout);
  double eta = d.dot(theta.pack(layout));
  if (std::abs(eta) > 500.0) {
    std::cerr << "death_probability: clamping linear predictor " << eta
              << " to +-500\n";
    eta = std::clamp(eta, -500.0, 500.0);
  }
  return sigmoid(eta);
}

std::size_t Assembled::n_rows() const {
  std::size_t n = 0;
  for (const auto& c : censuses) n += static_cast<std::size_t>(c.X.rows());
  return n;
}

Assembled assemble_recruits(const RecruitData& data, const InfluenceConfig& cfg,
                            const DesignLayout& layout) {
  if (data.empty()) throw ConfigError("assemble_recruits: no censuses");
  Assembled a;
  a.layout = layout;
  a.window = data.front().frame->window();
  for (const auto& cd : data) {
    if (!(cd.rho > 0)) throw ConfigError("assemble_recruits: rho must be > 0");
    if (!(cd.recruits.window() == a.window) ||
        !(cd.dummies.window() == a.window))
      throw ConfigError("assemble_recruits: window mismatch across censuses");
    AssembledCensus c;
    c.census_index = cd.frame->census_index();
    const int nb = static_cast<int>(cd.recruits.size());
    const int ny = static_cast<int>(cd.dummies.size());
    c.X.resize(nb + ny, layout.dim());
    c.y.resize(nb + ny);
    c.offset = Eigen::VectorXd::Constant(nb + ny, -std::log(cd.rho));
    c.locations.reserve(nb + ny);
    int r = 0;
    for (const auto& x : cd.recruits.points()) {
      c.X.row(r) =
          build_design(x, *cd.frame, cfg, ModelKind::kRecruit, layout);
      c.y(r) = 1.0;
      c.locations.push_back(x.u);
      ++r;
    }
    for (const auto& x : cd.dummies.points()) {
      c.X.row(r) =
          build_design(x, *cd.frame, cfg, ModelKind::kRecruit, layout);
      c.y(r) = 0.0;
      c.locations.push_back(x.u);
      ++r;
    }
    a.censuses.push_back(std::move(c));
  }
  return a;
}

Assembled assemble_deaths(const DeathData& data, const InfluenceConfig& cfg,
                          const DesignLayout& layout) {
  if (data.empty()) throw ConfigError("assemble_deaths: no censuses");
  Assembled a;
  a.layout = layout;
  a.window = data.front().frame->window();
  for (const auto& cd : data) {
    if (cd.died.size() != cd.previous.size())
      throw ConfigError("assemble_deaths: indicator/pattern size mismatch");
    AssembledCensus c;
    c.census_index = cd.frame->census_index();
    const int n = static_cast<int>(cd.previous.size());
    c.X.resize(n, layout.dim());
    c.y.resize(n);
    c.offset = Eigen::VectorXd::Zero(n);
    c.locations.reserve(n);
    for (int r = 0; r < n; ++r) {
      const auto& x = cd.previous[r];
      c.X.row(r) = build_design(x, *cd.frame, cfg, ModelKind::kDeath, layout);
      c.y(r) = cd.died[r] ? 1.0 : 0.0;
      c.locations.push_back(x.u);
    }
    a.censuses.push_back(std::move(c));
  }
  return a;
}

Eigen::VectorXd logistic_score(const Assembled& a, const Eigen::VectorXd& theta,
                               Eigen::MatrixXd* per_census) {
  const int d = a.layout.dim();
  if (theta.size() != d) throw ConfigError("logistic_score: theta size mismatch");
  if (per_census)
    per_census->setZero(d, static_cast<int>(a.censuses.size()));
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  int k = 0;
  for (const auto& c : a.censuses) {
    Eigen::VectorXd eta = c.X * theta + c.offset;
    Eigen::VectorXd resid(eta.size());
    for (int i = 0; i < eta.size(); ++i) resid(i) = c.y(i) - sigmoid(eta(i));
    const Eigen::VectorXd s = c.X.transpose() * resid;
    if (per_census) per_census->col(k) = s;
    total += s;
    ++k;
  }
  return total;
}

double logistic_loglik(const Assembled& a, const Eigen::VectorXd& theta) {
  double ll = 0.0;
  for (const auto& c : a.censuses) {
    const Eigen::VectorXd eta = c.X * theta + c.offset;
    for (int i = 0; i < eta.size(); ++i)
      ll += c.y(i) * eta(i) - softplus(eta(i));
  }
  return ll;
}

Eigen::VectorXd recruit_score(const Eigen::VectorXd& theta,
                              const RecruitData& data,
                              const InfluenceConfig& cfg,
                              const DesignLayout& layout) {
  return logistic_score(assemble_recruits(data, cfg, layout), theta);
}

Eigen::VectorXd death_score(const Eigen::VectorXd& theta,
                            const DeathData& data, const InfluenceConfig& cfg,
                            const DesignLayout& layout) {
  return logistic_score(assemble_deaths(data, cfg, layout), theta);
}

namespace {

void check_identifiable(const Assembled& a) {
  const int nb = a.layout.n_blocks;
  std::vector<int> ones(nb, 0), zeros(nb, 0);
  std::vector<std::set<int>> censuses(nb);
  for (const auto& c : a.censuses) {
    const int blk = a.layout.block_of(c.census_index);
    censuses[blk].insert(c.census_index + 1);
    for (int i = 0; i < c.y.size(); ++i)
      (c.y(i) > 0.5 ? ones : zeros)[blk] += 1;
  }
  for (int b = 0; b < nb; ++b) {
    if (ones[b] > 0 && zeros[b] > 0) continue;
    std::string which;
    for (int k : censuses[b]) which += " " + std::to_string(k);
    throw NumericalError(
        std::string("intercept block ") + std::to_string(b) +
        (ones[b] == 0 ? " has no events" : " has only events") +
        " (censuses:" + which + "); intercept not identifiable");
  }
}

FitResult finalize(const Assembled& a, Eigen::VectorXd theta, bool converged,
                   int iters, std::vector<std::string> warnings) {
  FitResult r;
  r.layout = a.layout;
  r.converged = converged;
  r.iterations = iters;
  r.warnings = std::move(warnings);
  Eigen::MatrixXd per_census;
  const Eigen::VectorXd g = logistic_score(a, theta, &per_census);
  r.score_norm = g.lpNorm<Eigen::Infinity>();
  r.per_census_scores = std::move(per_census);
  r.theta = std::move(theta);
  // Separation: every point of one class saturated at the optimum.
  if (r.converged) {
    bool all1 = true, all0 = true;
    for (const auto& c : a.censuses) {
      const Eigen::VectorXd eta = c.X * r.theta + c.offset;
      for (int i = 0; i < eta.size(); ++i) {
        if (c.y(i) > 0.5 && eta(i) <= 12) all1 = false;
        if (c.y(i) < 0.5 && eta(i) >= -12) all0 = false;
      }
    }
    if (all1 || all0)
      r.warnings.push_back("possible separation: one response class fully "
                           "saturated at the optimum");
  }
  return r;
}

}  // namespace

FitResult solve_newton(const Assembled& a, const FitOptions& opts,
                       const Eigen::VectorXd& init) {
  check_identifiable(a);
  const int d = a.layout.dim();
  Eigen::VectorXd theta =
      init.size() == d ? init : Eigen::VectorXd::Zero(d);
  std::vector<std::string> warnings;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Eigen::VectorXd g = logistic_score(a, theta);
    if (g.lpNorm<Eigen::Infinity>() <=
        opts.tol * (1.0 + theta.lpNorm<Eigen::Infinity>()))
      return finalize(a, theta, true, it - 1, std::move(warnings));
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
    for (const auto& c : a.censuses) {
      const Eigen::VectorXd eta = c.X * theta + c.offset;
      Eigen::VectorXd w(eta.size());
      for (int i = 0; i < eta.size(); ++i) {
        const double p = sigmoid(eta(i));
        w(i) = p * (1.0 - p);
      }
      H.noalias() += c.X.transpose() * w.asDiagonal() * c.X;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().maxCoeff())
      throw NumericalError("solve_newton: information matrix numerically "
                           "singular; design may be rank deficient");
    const Eigen::VectorXd step = ldlt.solve(g);
    // Step-halving on the concave Bernoulli objective. The rounding slack
    // matters near the root: genuine Newton steps improve the objective by
    // less than one ulp of ll0 there and must not be rejected, or the
    // gradient plateaus above tolerance.
    const double ll0 = logistic_loglik(a, theta);
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::abs(ll0));
    double s = 1.0;
    int halvings = 0;
    while (halvings < 40 &&
           logistic_loglik(a, theta + s * step) < ll0 - slack) {
      s *= 0.5;
      ++halvings;
    }
    if (halvings == 40) {
      warnings.push_back("line search failed to improve the objective");
      return finalize(a, theta, false, it, std::move(warnings));
    }
    theta += s * step;
  }
  const Eigen::VectorXd g = logistic_score(a, theta);
  warnings.push_back("no convergence in " + std::to_string(opts.max_iter) +
                     " iterations; final ||score||_inf = " +
                     std::to_string(g.lpNorm<Eigen::Infinity>()));
  return finalize(a, theta, false, opts.max_iter, std::move(warnings));
}

FitResult solve_irls(const Assembled& a, const FitOptions& opts,
                     const Eigen::VectorXd& init) {
  check_identifiable(a);
  const int d = a.layout.dim();
  Eigen::VectorXd theta = init.size() == d ? init : Eigen::VectorXd::Zero(d);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Eigen::VectorXd g = logistic_score(a, theta);
    if (g.lpNorm<Eigen::Infinity>() <=
        opts.tol * (1.0 + theta.lpNorm<Eigen::Infinity>()))
      return finalize(a, theta, true, it - 1, {});
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (const auto& c : a.censuses) {
      const Eigen::VectorXd eta = c.X * theta + c.offset;
      Eigen::VectorXd w(eta.size()), wz(eta.size());
      for (int i = 0; i < eta.size(); ++i) {
        const double p = sigmoid(eta(i));
        const double wi = std::max(p * (1.0 - p), 1e-12);
        w(i) = wi;
        // working response z = eta - offset + (y - p)/w
        wz(i) = wi * (eta(i) - c.offset(i)) + (c.y(i) - p);
      }
      H.noalias() += c.X.transpose() * w.asDiagonal() * c.X;
      b.noalias() += c.X.transpose() * wz;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("solve_irls: weighted normal equations singular");
    // Damped update: back off toward the previous iterate when the full
    // reweighted step overshoots (same slack rationale as solve_newton).
    const Eigen::VectorXd step = ldlt.solve(b) - theta;
    const double ll0 = logistic_loglik(a, theta);
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::abs(ll0));
    double s = 1.0;
    int halvings = 0;
    while (halvings < 40 &&
           logistic_loglik(a, theta + s * step) < ll0 - slack) {
      s *= 0.5;
      ++halvings;
    }
    if (halvings == 40)
      return finalize(a, theta, false, it,
                      {"IRLS line search failed to improve the objective"});
    theta += s * step;
  }
  return finalize(a, theta, false, opts.max_iter,
                  {"IRLS did not converge in " +
                   std::to_string(opts.max_iter) + " iterations"});
}

FitResult fit_recruits(const RecruitData& data, const InfluenceConfig& cfg,
                       const DesignLayout& layout, const FitOptions& opts) {
  const Assembled a = assemble_recruits(data, cfg, layout);
  return solve_newton(a, opts, Eigen::VectorXd::Zero(layout.dim()));
}

FitResult fit_deaths(const DeathData& data, const InfluenceConfig& cfg,
                     const DesignLayout& layout, const FitOptions& opts) {
  const Assembled a = assemble_deaths(data, cfg, layout);
  // Start intercepts at the logit of the raw per-block death rates.
  Eigen::VectorXd init = Eigen::VectorXd::Zero(layout.dim());
  std::vector<double> events(layout.n_blocks, 0.0), totals(layout.n_blocks, 0.0);
  for (const auto& c : a.censuses) {
    const int blk = layout.block_of(c.census_index);
    events[blk] += c.y.sum();
    totals[blk] += static_cast<double>(c.y.size());
  }
  for (int b = 0; b < layout.n_blocks; ++b) {
    if (totals[b] > 0) {
      const double rate =
          std::clamp(events[b] / totals[b], 1e-6, 1.0 - 1e-6);
      init(b) = std::log(rate / (1.0 - rate));
    }
  }
  return solve_newton(a, opts, init);
}

}  // namespace forestcl
