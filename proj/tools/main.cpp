// forestcl: composite-likelihood fitting, sandwich variances, simulation,
// and diagnostics for discrete-time series of spatial point patterns.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "forestcl/census_io.hpp"
#include "forestcl/diagnostics.hpp"
#include "forestcl/experiment.hpp"
#include "forestcl/rng.hpp"

namespace fs = std::filesystem;
using namespace forestcl;

namespace {

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

RunConfig load_config(const CliOptions& opt) {
  if (opt.config_path.empty()) throw ConfigError("--config is required");
  RunConfig cfg = RunConfig::load(opt.config_path);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.sim.seed = *opt.seed;
  }
  if (opt.threads) cfg.threads = *opt.threads;
  if (opt.out) cfg.output_dir = *opt.out;
  return cfg;
}

std::string provenance(const RunConfig& cfg) {
  std::ostringstream oss;
  oss << "config_hash=" << cfg.config_hash << " seed=" << cfg.seed;
  return oss.str();
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  std::ofstream f(fs::path(cfg.output_dir) / name);
  if (!f) throw DataError("cannot write " + name + " in " + cfg.output_dir);
  f << "# " << provenance(cfg) << "\n";
  return f;
}

std::vector<std::shared_ptr<const RasterField>> load_covariates(
    const RunConfig& cfg) {
  std::vector<std::shared_ptr<const RasterField>> out;
  for (const auto& path : cfg.covariate_rasters) {
    auto field = std::make_shared<RasterField>(read_ascii_grid(path));
    if (!(field->window() == cfg.window))
      throw DataError("covariate raster '" + path +
                      "' does not cover the configured window");
    out.push_back(std::move(field));
  }
  return out;
}

struct FittedData {
  IngestResult ingest;
  std::vector<std::shared_ptr<const HistoryFrame>> frames;
  DesignLayout recruit_layout, death_layout;
  // Per species:
  std::vector<Assembled> recruit_assembled, death_assembled;
  std::vector<FitResult> recruit_fit, death_fit;
};

FittedData fit_from_census(const RunConfig& cfg) {
  if (cfg.census_csv.empty())
    throw ConfigError("config: census_csv is required for this command");
  FittedData fd;
  fd.ingest = ingest_census(CensusTable::read_csv_file(cfg.census_csv),
                            cfg.window, cfg.allow_missing_marks);
  const int K = static_cast<int>(fd.ingest.census.size()) - 1;
  if (K < 1) throw DataError("need at least two censuses to fit");
  const int p = fd.ingest.n_species;
  if (cfg.influence.n_species() != p)
    throw ConfigError("config: influence lists " +
                      std::to_string(cfg.influence.n_species()) +
                      " species but the data has " + std::to_string(p));
  auto covariates = load_covariates(cfg);
  const int q = static_cast<int>(covariates.size());
  fd.recruit_layout = cfg.intercepts == "shared"
                          ? DesignLayout::shared_intercept(K, false, q, p)
                          : DesignLayout::per_census(K, false, q, p);
  fd.death_layout =
      cfg.intercepts == "shared"
          ? DesignLayout::shared_intercept(K, cfg.death_include_mark, q, p)
          : DesignLayout::per_census(K, cfg.death_include_mark, q, p);
  fd.frames = build_frames(fd.ingest.census, covariates);

  FitOptions opts;
  opts.tol = cfg.solver.tol;
  opts.max_iter = cfg.solver.max_iter;
  const MarkDensity marks = MarkDensity::point_mass(1.0);  // dummy marks
  for (int l = 1; l <= p; ++l) {
    const RecruitData rdata =
        make_recruit_data(fd.frames, fd.ingest.census, l, cfg.dummy, marks,
                          stream_seed(cfg.dummy.seed, 0, l));
    fd.recruit_assembled.push_back(
        assemble_recruits(rdata, cfg.influence, fd.recruit_layout));
    FitResult fr = solve_newton(
        fd.recruit_assembled.back(), opts,
        Eigen::VectorXd::Zero(fd.recruit_layout.dim()));
    if (!fr.converged)
      throw NumericalError("recruit fit (species " + std::to_string(l) +
                           ") did not converge; score norm " +
                           std::to_string(fr.score_norm));
    fd.recruit_fit.push_back(std::move(fr));

    const DeathData ddata = make_death_data(fd.frames, fd.ingest.census, l);
    fd.death_assembled.push_back(
        assemble_deaths(ddata, cfg.influence, fd.death_layout));
    FitResult fdth =
        solve_newton(fd.death_assembled.back(), opts,
                     Eigen::VectorXd::Zero(fd.death_layout.dim()));
    if (!fdth.converged)
      throw NumericalError("death fit (species " + std::to_string(l) +
                           ") did not converge; score norm " +
                           std::to_string(fdth.score_norm));
    fd.death_fit.push_back(std::move(fdth));
  }
  return fd;
}

void write_estimates(const RunConfig& cfg, const FittedData& fd) {
  auto f = open_out(cfg, "estimates.csv");
  f << "species,model,param,estimate,converged,iterations\n";
  f.precision(17);
  for (std::size_t l = 0; l < fd.recruit_fit.size(); ++l) {
    const auto& fr = fd.recruit_fit[l];
    for (int i = 0; i < fr.theta.size(); ++i)
      f << (l + 1) << ",recruit,"
        << fd.recruit_layout.name_of(i, ModelKind::kRecruit) << ','
        << fr.theta(i) << ',' << fr.converged << ',' << fr.iterations << "\n";
    const auto& fdth = fd.death_fit[l];
    for (int i = 0; i < fdth.theta.size(); ++i)
      f << (l + 1) << ",death,"
        << fd.death_layout.name_of(i, ModelKind::kDeath) << ','
        << fdth.theta(i) << ',' << fdth.converged << ',' << fdth.iterations
        << "\n";
  }
}

int cmd_ingest_check(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (cfg.census_csv.empty())
    throw ConfigError("config: census_csv is required for ingest-check");
  const IngestResult r =
      ingest_census(CensusTable::read_csv_file(cfg.census_csv), cfg.window,
                    cfg.allow_missing_marks);
  std::cout << r.report;
  return 0;
}

int cmd_fit(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  const FittedData fd = fit_from_census(cfg);
  write_estimates(cfg, fd);
  fs::create_directories(cfg.output_dir);
  for (std::size_t l = 0; l < fd.recruit_fit.size(); ++l) {
    write_params(fd.recruit_fit[l].theta, fd.recruit_layout,
                 ModelKind::kRecruit,
                 (fs::path(cfg.output_dir) /
                  ("recruit_sp" + std::to_string(l + 1) + ".params"))
                     .string());
    write_params(fd.death_fit[l].theta, fd.death_layout, ModelKind::kDeath,
                 (fs::path(cfg.output_dir) /
                  ("death_sp" + std::to_string(l + 1) + ".params"))
                     .string());
  }
  std::cout << "wrote estimates to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_variance(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  const FittedData fd = fit_from_census(cfg);
  write_estimates(cfg, fd);
  for (double omega : cfg.omegas) {
    std::ostringstream name;
    name << "results_omega" << omega << ".csv";
    auto f = open_out(cfg, name.str());
    f << "species,model,param,estimate,se,z,p,ci_lo,ci_hi,omega\n";
    f.precision(12);
    const TruncationKernel kernel(omega);
    for (std::size_t l = 0; l < fd.recruit_fit.size(); ++l) {
      auto emit = [&](const Assembled& a, const FitResult& fit, bool recruit) {
        const Eigen::MatrixXd S = sensitivity(a, fit.theta);
        const Eigen::MatrixXd V = recruit
                                      ? variability_recruits(a, fit.theta,
                                                             kernel)
                                      : variability_deaths(a, fit.theta,
                                                           kernel);
        const SandwichResult g =
            godambe(S, V, fit.theta, cfg.level, omega);
        const auto kind = recruit ? ModelKind::kRecruit : ModelKind::kDeath;
        const auto& layout = recruit ? fd.recruit_layout : fd.death_layout;
        for (int i = 0; i < fit.theta.size(); ++i)
          f << (l + 1) << ',' << (recruit ? "recruit" : "death") << ','
            << layout.name_of(i, kind) << ',' << fit.theta(i) << ','
            << g.se(i) << ',' << g.z(i) << ',' << g.pvalue(i) << ','
            << g.ci_lo(i) << ',' << g.ci_hi(i) << ',' << omega << "\n";
      };
      emit(fd.recruit_assembled[l], fd.recruit_fit[l], true);
      emit(fd.death_assembled[l], fd.death_fit[l], false);
    }
  }
  std::cout << "wrote results for " << cfg.omegas.size() << " omega value(s) to "
            << cfg.output_dir << "\n";
  return 0;
}

int cmd_diagnostics(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  const FittedData fd = fit_from_census(cfg);
  std::vector<double> rgrid = cfg.pcf_rgrid;
  if (rgrid.empty())
    for (int i = 1; i <= 15; ++i) rgrid.push_back(2.0 * i);
  std::vector<double> hgrid = cfg.variogram_hgrid;
  if (hgrid.empty())
    for (int i = 1; i <= 20; ++i) hgrid.push_back(5.0 * i);

  const int K = static_cast<int>(fd.ingest.census.size()) - 1;
  const int p = fd.ingest.n_species;
  for (int l = 1; l <= p; ++l) {
    for (int k = 1; k <= K; ++k) {
      // Recruit pcf with the fitted conditional intensity plug-in.
      const PointPattern& recruits = fd.ingest.recruits[k][l - 1];
      if (recruits.size() >= 2) {
        std::vector<double> zeta;
        for (const auto& x : recruits.points())
          zeta.push_back(std::exp(
              build_design(x, *fd.frames[k - 1], cfg.influence,
                           ModelKind::kRecruit, fd.recruit_layout)
                  .dot(fd.recruit_fit[l - 1].theta)));
        const double bw = cfg.pcf_bandwidth > 0
                              ? cfg.pcf_bandwidth
                              : pcf_default_bandwidth(cfg.window,
                                                      recruits.size());
        const Curve c = pcf_estimate(recruits, zeta, bw, rgrid);
        std::ostringstream name;
        name << "pcf_census" << k << "_sp" << l << ".csv";
        auto f = open_out(cfg, name.str());
        f << "r,g,unreliable\n";
        for (std::size_t i = 0; i < c.x.size(); ++i)
          f << c.x[i] << ',' << c.y[i] << ',' << (c.unreliable[i] ? 1 : 0)
            << "\n";
      }
      // Death-residual variogram.
      const PointPattern& prev = fd.ingest.census[k - 1][l - 1];
      if (prev.size() >= 2) {
        std::vector<Eigen::Vector2d> pts;
        std::vector<double> resid;
        const Eigen::VectorXd& th = fd.death_fit[l - 1].theta;
        for (const auto& x : prev.points()) {
          const double eta =
              build_design(x, *fd.frames[k - 1], cfg.influence,
                           ModelKind::kDeath, fd.death_layout)
                  .dot(th);
          const double pr = 1.0 / (1.0 + std::exp(-eta));
          const double died =
              fd.ingest.census[k][l - 1].contains_id(x.id) ? 0.0 : 1.0;
          pts.push_back(x.u);
          resid.push_back(died - pr);
        }
        const Curve c =
            indicator_variogram(pts, resid, hgrid, cfg.variogram_tol);
        std::ostringstream name;
        name << "variogram_census" << k << "_sp" << l << ".csv";
        auto f = open_out(cfg, name.str());
        f << "h,gamma\n";
        for (std::size_t i = 0; i < c.x.size(); ++i) {
          f << c.x[i] << ',';
          if (std::isnan(c.y[i])) f << "";
          else f << c.y[i];
          f << "\n";
        }
      }
    }
  }
  std::cout << "wrote diagnostics to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_simulate(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (!cfg.has_simulation)
    throw ConfigError("config: a 'simulation' section is required");
  const SimEngine engine(cfg.sim);
  fs::create_directories(cfg.output_dir);
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    const ReplicateResult rr = engine.run_replicate(rep);
    {
      std::ostringstream name;
      name << "census_rep" << rep << ".csv";
      std::ofstream f(fs::path(cfg.output_dir) / name.str());
      if (!f) throw DataError("cannot write census csv");
      to_table(rr.census).write_csv(f);
    }
    for (std::size_t j = 0; j < rr.covariates.size(); ++j) {
      std::ostringstream name;
      name << "z" << (j + 1) << "_rep" << rep << ".asc";
      write_ascii_grid(*rr.covariates[j],
                       (fs::path(cfg.output_dir) / name.str()).string());
    }
    std::ostringstream name;
    name << "events_rep" << rep << ".log";
    std::ofstream f(fs::path(cfg.output_dir) / name.str());
    f << "# " << provenance(cfg) << "\n";
    for (const auto& e : rr.events) f << e << "\n";
  }
  std::cout << "wrote " << cfg.replicates << " replicate(s) to "
            << cfg.output_dir << "\n";
  return 0;
}

int cmd_experiment(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  if (!cfg.has_simulation)
    throw ConfigError("config: a 'simulation' section is required");
  if (!cfg.has_experiment)
    throw ConfigError("config: an 'experiment' section is required");
  ExperimentConfig ec;
  ec.base = cfg.sim;
  ec.replicates = cfg.experiment.replicates;
  ec.extra_windows = cfg.experiment.extra_windows;
  ec.omegas = cfg.experiment.omegas;
  ec.level = cfg.experiment.level;
  ec.threads = cfg.threads;
  ec.dummy = cfg.dummy;
  ec.solver = cfg.solver;
  const ExperimentResult r = run_experiment(ec);
  write_experiment_csvs(r, ec, cfg.output_dir, provenance(cfg));
  int failed = 0;
  for (const auto& w : r.windows) failed += w.n_failed;
  std::cout << "experiment done; " << failed << " failed replicate(s); "
            << "tables in " << cfg.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Composite-likelihood inference for discrete-time series of spatial "
      "point patterns"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "Path to the JSON run config")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "Master seed override");
  app.add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", opt.out, "Output directory override");

  auto* s_sim = app.add_subcommand("simulate", "Generate census series");
  auto* s_fit = app.add_subcommand("fit", "Fit recruit and death models");
  auto* s_var = app.add_subcommand(
      "variance", "Fit and compute sandwich variances over the omega grid");
  auto* s_diag = app.add_subcommand(
      "diagnostics", "Pair correlation and variogram diagnostics");
  auto* s_exp = app.add_subcommand(
      "experiment", "Monte Carlo study: simulate, fit, summarize");
  auto* s_ing =
      app.add_subcommand("ingest-check", "Validate a census CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s_sim->parsed()) return cmd_simulate(opt);
    if (s_fit->parsed()) return cmd_fit(opt);
    if (s_var->parsed()) return cmd_variance(opt);
    if (s_diag->parsed()) return cmd_diagnostics(opt);
    if (s_exp->parsed()) return cmd_experiment(opt);
    if (s_ing->parsed()) return cmd_ingest_check(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
