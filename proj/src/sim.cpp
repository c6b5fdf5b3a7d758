#include "forestcl/sim.hpp"

#include <algorithm>
#include <cmath>

#include "forestcl/rng.hpp"
#include "forestcl/sandwich.hpp"  // normal_cdf

namespace forestcl {

SimConfig SimConfig::study_defaults(const Window& w, int K,
                                    std::uint64_t seed) {
  SimConfig cfg;
  cfg.window = w;
  cfg.K = K;
  cfg.grid_cellsize = 1.0;
  cfg.n_species = 2;
  cfg.seed = seed;

  const int K_eff = std::max(K, 1);  // K = 0 still frames the initial census
  cfg.recruit_layout = DesignLayout::shared_intercept(K_eff, false, 2, 2);
  cfg.death_layout = DesignLayout::shared_intercept(K_eff, false, 2, 2);

  RecruitParams r1;
  r1.beta0 = Eigen::VectorXd::Constant(1, -6.32);
  r1.beta = Eigen::Vector2d(0.0, 0.1);
  r1.gamma = Eigen::Vector2d(0.1, -2.0);
  RecruitParams r2 = r1;
  r2.gamma = Eigen::Vector2d(-2.0, 0.1);
  cfg.recruit = {r1, r2};

  DeathParams d;
  d.beta0 = Eigen::VectorXd::Constant(1, -0.25);
  d.alpha = 0.0;
  d.beta = Eigen::Vector2d(0.25, 0.0);
  d.gamma = Eigen::Vector2d(-0.25, 0.25);
  cfg.death = {d, d};

  cfg.lgcp_field = MaternParams(1.0, 1.75, 4.0);
  cfg.death_field = MaternParams(1.0, 0.5, 7.0);
  cfg.influence.recruit = {InfluenceSpec::dispersal(6.0),
                           InfluenceSpec::dispersal(6.0)};
  cfg.influence.death = {InfluenceSpec::competition(10.0),
                         InfluenceSpec::competition(10.0)};
  cfg.influence.divide_by_own_mark = true;
  cfg.marks = MarkDensity::point_mass(1.0);

  // Covariate fields: standard deviations 1/3, scales 28 and 16,
  // smoothness 0.5 and 1.75.
  cfg.covariate_fields = {MaternParams(1.0 / 9.0, 0.5, 28.0),
                          MaternParams(1.0 / 9.0, 1.75, 16.0)};
  return cfg;
}

std::shared_ptr<const HistoryFrame> ReplicateResult::frame_at(
    int census_index) const {
  return std::make_shared<HistoryFrame>(census.at(census_index), covariates,
                                        census_index);
}

PointPattern simulate_lgcp_recruits(const HistoryFrame& frame,
                                    const RecruitParams& theta,
                                    const GrfSampler& field,
                                    const InfluenceConfig& cfg,
                                    const DesignLayout& layout,
                                    const MarkDensity& f, std::uint64_t seed,
                                    std::int64_t id_base, int species) {
  const RasterField g = field.sample(stream_seed(seed, 0x6c67));
  const double sigma2 = field.params().sigma2;
  const double cell = g.cellsize();
  const double cell_area = cell * cell;
  const int block = layout.block_of(frame.census_index());

  const int p = layout.p;
  if (theta.gamma.size() != p || static_cast<int>(cfg.recruit.size()) != p)
    throw ConfigError("simulate_lgcp_recruits: influence dimension mismatch");
  const bool no_influence = (theta.gamma.array() == 0).all();
  // The acceptance bound needs bounded influences; dispersal kernels are
  // in [0,1], competition indices are not.
  bool bounded = no_influence;
  if (!bounded) {
    bounded = true;
    for (const auto& s : cfg.recruit)
      if (s.kind != InfluenceKind::kDispersal) bounded = false;
  }
  if (!bounded)
    throw ConfigError(
        "simulate_lgcp_recruits: unbounded (competition) recruit influences "
        "are not supported by the sampler's acceptance bound");
  double gamma_pos = 0.0;
  for (int l = 0; l < p; ++l) gamma_pos += std::max(theta.gamma(l), 0.0);

  auto rng = make_rng(seed, 0x6c676370);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> jitter(-0.5 * cell, 0.5 * cell);

  std::vector<MarkedPoint> out;
  double expected_total = 0.0;
  std::int64_t next_id = id_base;
  const double own_mark = f.is_point_mass() ? f.sample(rng) : 1.0;
  for (int row = 0; row < g.nrows(); ++row) {
    for (int col = 0; col < g.ncols(); ++col) {
      const Eigen::Vector2d center = g.cell_center(row, col);
      double eta = theta.beta0(block);
      for (int j = 0; j < layout.q; ++j)
        eta += theta.beta(j) * frame.covariate(j).lookup(center);
      const double log_mu_max = eta + gamma_pos +
                                (g.values()(row, col) - 0.5 * sigma2) +
                                std::log(cell_area);
      if (log_mu_max > 700.0)
        throw NumericalError("simulate_lgcp_recruits: intensity overflow");
      const double mu_max = std::exp(log_mu_max);
      expected_total += mu_max;
      if (expected_total > 1e7)
        throw NumericalError(
            "simulate_lgcp_recruits: expected count exceeds 1e7; check "
            "parameters");
      std::poisson_distribution<int> pois(mu_max);
      const int n = pois(rng);
      if (n == 0) continue;
      double accept = 1.0;
      if (!no_influence) {
        MarkedPoint probe;
        probe.id = -1;
        probe.u = center;
        probe.m = own_mark;
        double gsum = 0.0;
        for (int l = 0; l < p; ++l)
          gsum += theta.gamma(l) * influence_value(probe, frame.index(l + 1),
                                                   cfg.recruit[l],
                                                   cfg.divide_by_own_mark);
        accept = std::exp(gsum - gamma_pos);
      }
      for (int i = 0; i < n; ++i) {
        const double u = unif(rng);
        if (u > accept) continue;
        MarkedPoint pt;
        pt.id = next_id++;
        pt.u = {std::clamp(center.x() + jitter(rng), frame.window().xmin,
                           frame.window().xmax),
                std::clamp(center.y() + jitter(rng), frame.window().ymin,
                           frame.window().ymax)};
        pt.m = f.sample(rng);
        pt.species = species;
        out.push_back(pt);
      }
    }
  }
  return PointPattern(std::move(out), frame.window());
}

std::vector<std::uint8_t> simulate_deaths(const HistoryFrame& frame,
                                          int species,
                                          const DeathParams& theta,
                                          const GrfSampler& field,
                                          const InfluenceConfig& cfg,
                                          const DesignLayout& layout,
                                          std::uint64_t seed) {
  const RasterField u_field = field.sample(stream_seed(seed, 0x6465));
  const Eigen::VectorXd packed = theta.pack(layout);
  const PointPattern& prev = frame.pattern(species);
  std::vector<std::uint8_t> died(prev.size(), 0);
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const auto& x = prev[i];
    const double eta =
        build_design(x, frame, cfg, ModelKind::kDeath, layout).dot(packed);
    const double p = normal_cdf(u_field.lookup(x.u));
    // tau is marginally standard logistic; +-inf endpoints resolve the
    // saturated cases correctly.
    const double tau = std::log(p) - std::log1p(-p);
    died[i] = (tau <= eta) ? 1 : 0;
  }
  return died;
}

SimEngine::SimEngine(SimConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.n_species < 1) throw ConfigError("SimEngine: need >= 1 species");
  if (static_cast<int>(cfg_.recruit.size()) != cfg_.n_species ||
      static_cast<int>(cfg_.death.size()) != cfg_.n_species)
    throw ConfigError("SimEngine: per-species parameter count mismatch");
  if (!cfg_.covariate_fields.empty() && !cfg_.covariate_rasters.empty())
    throw ConfigError("SimEngine: give covariates as fields or rasters, not both");
  lgcp_ = std::make_unique<GrfSampler>(cfg_.window, cfg_.grid_cellsize,
                                       cfg_.lgcp_field);
  death_ = std::make_unique<GrfSampler>(cfg_.window, cfg_.grid_cellsize,
                                        cfg_.death_field);
  for (const auto& p : cfg_.covariate_fields)
    covariate_samplers_.push_back(
        std::make_unique<GrfSampler>(cfg_.window, cfg_.grid_cellsize, p));
}

ReplicateResult SimEngine::run_replicate(int rep) const {
  const auto& cfg = cfg_;
  ReplicateResult out;
  // Covariates: fixed rasters, or fresh draws per replicate.
  if (!cfg.covariate_rasters.empty()) {
    out.covariates = cfg.covariate_rasters;
  } else {
    for (std::size_t j = 0; j < covariate_samplers_.size(); ++j)
      out.covariates.push_back(std::make_shared<RasterField>(
          covariate_samplers_[j]->sample(
              stream_seed(cfg.seed, rep, 9000 + j, 1))));
  }

  std::vector<std::int64_t> next_id(cfg.n_species);
  for (int l = 0; l < cfg.n_species; ++l)
    next_id[l] = static_cast<std::int64_t>(l + 1) * 1'000'000'000'000LL;

  // Initial patterns: the same LGCP with zero influence coefficients.
  std::vector<PointPattern> empty;
  for (int l = 0; l < cfg.n_species; ++l)
    empty.emplace_back(std::vector<MarkedPoint>{}, cfg.window);
  const HistoryFrame frame0(empty, out.covariates, 0);
  std::vector<PointPattern> initial;
  for (int l = 0; l < cfg.n_species; ++l) {
    RecruitParams theta0 = cfg.recruit[l];
    theta0.gamma.setZero();
    PointPattern p = simulate_lgcp_recruits(
        frame0, theta0, *lgcp_, cfg.influence, cfg.recruit_layout, cfg.marks,
        stream_seed(cfg.seed, rep, 0, 100 + l), next_id[l], l + 1);
    next_id[l] += static_cast<std::int64_t>(p.size());
    initial.push_back(std::move(p));
  }
  out.census.push_back(std::move(initial));

  for (int k = 1; k <= cfg.K; ++k) {
    const auto frame = out.frame_at(k - 1);
    std::vector<PointPattern> current;
    for (int l = 0; l < cfg.n_species; ++l) {
      const PointPattern& prev = out.census[k - 1][l];
      PointPattern recruits = simulate_lgcp_recruits(
          *frame, cfg.recruit[l], *lgcp_, cfg.influence, cfg.recruit_layout,
          cfg.marks, stream_seed(cfg.seed, rep, k, 200 + l), next_id[l],
          l + 1);
      next_id[l] += static_cast<std::int64_t>(recruits.size());
      const std::vector<std::uint8_t> died = simulate_deaths(
          *frame, l + 1, cfg.death[l], *death_, cfg.influence,
          cfg.death_layout, stream_seed(cfg.seed, rep, k, 300 + l));
      std::vector<MarkedPoint> pts;
      for (std::size_t i = 0; i < prev.size(); ++i)
        if (!died[i]) pts.push_back(prev[i]);
      for (const auto& x : recruits.points()) pts.push_back(x);
      if (pts.empty())
        out.events.push_back("census " + std::to_string(k) + ": species " +
                             std::to_string(l + 1) + " extinct");
      current.emplace_back(std::move(pts), cfg.window);
    }
    out.census.push_back(std::move(current));
  }
  return out;
}

ReplicateResult run_replicate(const SimConfig& cfg, int rep) {
  return SimEngine(cfg).run_replicate(rep);
}

}  // namespace forestcl
