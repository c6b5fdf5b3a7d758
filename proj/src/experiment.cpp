#include "forestcl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "forestcl/rng.hpp"

namespace forestcl {

std::vector<std::shared_ptr<const HistoryFrame>> build_frames(
    const std::vector<std::vector<PointPattern>>& census,
    const std::vector<std::shared_ptr<const RasterField>>& covariates) {
  if (census.empty()) throw ConfigError("build_frames: empty census series");
  std::vector<std::shared_ptr<const HistoryFrame>> frames;
  for (std::size_t k = 0; k + 1 < census.size(); ++k)
    frames.push_back(std::make_shared<HistoryFrame>(census[k], covariates,
                                                    static_cast<int>(k)));
  return frames;
}

RecruitData make_recruit_data(
    const std::vector<std::shared_ptr<const HistoryFrame>>& frames,
    const std::vector<std::vector<PointPattern>>& census, int species,
    const DummySpec& dummy, const MarkDensity& marks, std::uint64_t seed) {
  if (frames.size() + 1 != census.size())
    throw ConfigError("make_recruit_data: frames/census size mismatch");
  RecruitData data;
  for (std::size_t k = 1; k < census.size(); ++k) {
    RecruitCensusData d;
    d.frame = frames[k - 1];
    d.recruits =
        set_difference(census[k][species - 1], census[k - 1][species - 1])
            .recruits;
    const double area = d.frame->window().area();
    d.rho = dummy.rho ? *dummy.rho
                      : dummy.factor *
                            std::max<std::size_t>(d.recruits.size(), 1) / area;
    d.dummies = sample_dummy(d.frame->window(), static_cast<int>(k),
                             DummyConfig(d.rho, stream_seed(seed, species)),
                             marks);
    data.push_back(std::move(d));
  }
  return data;
}

DeathData make_death_data(
    const std::vector<std::shared_ptr<const HistoryFrame>>& frames,
    const std::vector<std::vector<PointPattern>>& census, int species) {
  if (frames.size() + 1 != census.size())
    throw ConfigError("make_death_data: frames/census size mismatch");
  DeathData data;
  for (std::size_t k = 1; k < census.size(); ++k) {
    DeathCensusData d;
    d.frame = frames[k - 1];
    d.previous = census[k - 1][species - 1];
    d.died.resize(d.previous.size());
    for (std::size_t i = 0; i < d.previous.size(); ++i)
      d.died[i] = census[k][species - 1].contains_id(d.previous[i].id) ? 0 : 1;
    data.push_back(std::move(d));
  }
  return data;
}

namespace {

// Fit one assembled problem and its sandwich at every omega.
void fit_and_sandwich(const Assembled& a, const FitOptions& opts,
                      const std::vector<double>& omegas, double level,
                      bool recruit_style, Eigen::VectorXd& theta,
                      std::vector<Eigen::VectorXd>& se,
                      std::vector<Eigen::VectorXd>& lo,
                      std::vector<Eigen::VectorXd>& hi) {
  FitResult fit = solve_newton(a, opts, Eigen::VectorXd::Zero(a.layout.dim()));
  if (!fit.converged)
    throw NumericalError("fit did not converge; final score norm " +
                         std::to_string(fit.score_norm));
  theta = fit.theta;
  const Eigen::MatrixXd S = sensitivity(a, theta);
  for (double omega : omegas) {
    const TruncationKernel kernel(omega);
    const Eigen::MatrixXd V = recruit_style
                                  ? variability_recruits(a, theta, kernel)
                                  : variability_deaths(a, theta, kernel);
    const SandwichResult g = godambe(S, V, theta, level, omega);
    se.push_back(g.se);
    lo.push_back(g.ci_lo);
    hi.push_back(g.ci_hi);
  }
}

}  // namespace

ReplicateRecord fit_replicate(const SimEngine& engine, int rep,
                              const std::vector<double>& omegas, double level,
                              const DummySpec& dummy,
                              const SolverConfig& solver) {
  const SimConfig& cfg = engine.config();
  ReplicateRecord rec;
  rec.rep = rep;
  try {
    const ReplicateResult rr = engine.run_replicate(rep);
    const auto frames = build_frames(rr.census, rr.covariates);
    FitOptions opts;
    opts.tol = solver.tol;
    opts.max_iter = solver.max_iter;
    for (int l = 1; l <= cfg.n_species; ++l) {
      SpeciesFit sf;
      const RecruitData rdata =
          make_recruit_data(frames, rr.census, l, dummy, cfg.marks,
                            stream_seed(dummy.seed, rep, l));
      const Assembled ar =
          assemble_recruits(rdata, cfg.influence, cfg.recruit_layout);
      fit_and_sandwich(ar, opts, omegas, level, /*recruit_style=*/true,
                       sf.recruit_theta, sf.recruit_se, sf.recruit_lo,
                       sf.recruit_hi);
      const DeathData ddata = make_death_data(frames, rr.census, l);
      const Assembled ad =
          assemble_deaths(ddata, cfg.influence, cfg.death_layout);
      fit_and_sandwich(ad, opts, omegas, level, /*recruit_style=*/false,
                       sf.death_theta, sf.death_se, sf.death_lo, sf.death_hi);
      rec.species.push_back(std::move(sf));
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.species.clear();
  }
  return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.replicates < 2)
    throw ConfigError("run_experiment: need >= 2 replicates");
  ExperimentResult result;
  result.omegas = cfg.omegas;
  result.level = cfg.level;

  std::vector<std::pair<std::string, Window>> windows;
  windows.emplace_back("W", cfg.base.window);
  for (const auto& w : cfg.extra_windows) windows.push_back(w);

  unsigned n_threads = cfg.threads > 0
                           ? static_cast<unsigned>(cfg.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads,
                                 static_cast<unsigned>(cfg.replicates));

  for (const auto& [name, window] : windows) {
    WindowStudy study;
    study.name = name;
    study.window = window;
    study.cfg = cfg.base;
    study.cfg.window = window;
    const SimEngine engine(study.cfg);
    study.reps.resize(cfg.replicates);

    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int rep = next.fetch_add(1);
        if (rep >= cfg.replicates) return;
        study.reps[rep] = fit_replicate(engine, rep, cfg.omegas, cfg.level,
                                        cfg.dummy, cfg.solver);
      }
    };
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (const auto& r : study.reps)
      if (!r.ok) ++study.n_failed;
    result.windows.push_back(std::move(study));
  }
  return result;
}

namespace {

struct ParamRef {
  int species;       // 1-based
  bool recruit;      // model
  int pos;           // position in packed vector
  std::string name;  // layout name + species suffix
  double truth;
};

std::vector<ParamRef> param_refs(const SimConfig& cfg) {
  std::vector<ParamRef> out;
  for (int l = 1; l <= cfg.n_species; ++l) {
    const Eigen::VectorXd tr = cfg.recruit[l - 1].pack(cfg.recruit_layout);
    for (int i = 0; i < tr.size(); ++i)
      out.push_back({l, true, i,
                     cfg.recruit_layout.name_of(i, ModelKind::kRecruit) +
                         ".sp" + std::to_string(l),
                     tr(i)});
    const Eigen::VectorXd td = cfg.death[l - 1].pack(cfg.death_layout);
    for (int i = 0; i < td.size(); ++i)
      out.push_back({l, false, i,
                     cfg.death_layout.name_of(i, ModelKind::kDeath) + ".sp" +
                         std::to_string(l),
                     td(i)});
  }
  return out;
}

double estimate_of(const ReplicateRecord& r, const ParamRef& p) {
  const SpeciesFit& s = r.species[p.species - 1];
  return p.recruit ? s.recruit_theta(p.pos) : s.death_theta(p.pos);
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void write_experiment_csvs(const ExperimentResult& r,
                           const ExperimentConfig& cfg,
                           const std::string& out_dir,
                           const std::string& provenance) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(out_dir) / name);
    if (!f) throw DataError("cannot write " + name + " in " + out_dir);
    f << "# " << provenance << "\n";
    return f;
  };

  {
    auto f = open("estimates.csv");
    f << "window,rep,species,model,param,truth,estimate\n";
    for (const auto& w : r.windows) {
      const auto refs = param_refs(w.cfg);
      for (const auto& rec : w.reps) {
        if (!rec.ok) continue;
        for (const auto& p : refs)
          f << w.name << ',' << rec.rep << ',' << p.species << ','
            << (p.recruit ? "recruit" : "death") << ',' << p.name << ','
            << p.truth << ',' << estimate_of(rec, p) << "\n";
      }
    }
  }
  {
    auto f = open("variance.csv");
    f << "window,rep,species,model,param,omega,se,ci_lo,ci_hi\n";
    for (const auto& w : r.windows) {
      const auto refs = param_refs(w.cfg);
      for (const auto& rec : w.reps) {
        if (!rec.ok) continue;
        for (const auto& p : refs) {
          const SpeciesFit& s = rec.species[p.species - 1];
          for (std::size_t oi = 0; oi < r.omegas.size(); ++oi) {
            const auto& se = p.recruit ? s.recruit_se[oi] : s.death_se[oi];
            const auto& lo = p.recruit ? s.recruit_lo[oi] : s.death_lo[oi];
            const auto& hi = p.recruit ? s.recruit_hi[oi] : s.death_hi[oi];
            f << w.name << ',' << rec.rep << ',' << p.species << ','
              << (p.recruit ? "recruit" : "death") << ',' << p.name << ','
              << r.omegas[oi] << ',' << se(p.pos) << ',' << lo(p.pos) << ','
              << hi(p.pos) << "\n";
          }
        }
      }
    }
  }
  {
    auto f = open("summary.csv");
    f << "window,species,model,param,truth,mean,bias,emp_var,n_ok,n_failed\n";
    for (const auto& w : r.windows) {
      const auto refs = param_refs(w.cfg);
      for (const auto& p : refs) {
        std::vector<double> est;
        for (const auto& rec : w.reps)
          if (rec.ok) est.push_back(estimate_of(rec, p));
        if (est.size() < 2) continue;
        const double m = mean_of(est);
        f << w.name << ',' << p.species << ','
          << (p.recruit ? "recruit" : "death") << ',' << p.name << ','
          << p.truth << ',' << m << ',' << (m - p.truth) << ',' << var_of(est)
          << ',' << est.size() << ',' << w.n_failed << "\n";
      }
    }
  }
  {
    auto f = open("coverage.csv");
    f << "window,species,model,param,omega,coverage,median_sandwich_var,"
         "emp_var,n\n";
    for (const auto& w : r.windows) {
      const auto refs = param_refs(w.cfg);
      for (const auto& p : refs) {
        std::vector<double> est;
        for (const auto& rec : w.reps)
          if (rec.ok) est.push_back(estimate_of(rec, p));
        if (est.size() < 2) continue;
        const double ev = var_of(est);
        for (std::size_t oi = 0; oi < r.omegas.size(); ++oi) {
          int hit = 0, n = 0;
          std::vector<double> vars;
          for (const auto& rec : w.reps) {
            if (!rec.ok) continue;
            const SpeciesFit& s = rec.species[p.species - 1];
            const auto& lo = p.recruit ? s.recruit_lo[oi] : s.death_lo[oi];
            const auto& hi = p.recruit ? s.recruit_hi[oi] : s.death_hi[oi];
            const auto& se = p.recruit ? s.recruit_se[oi] : s.death_se[oi];
            ++n;
            if (p.truth >= lo(p.pos) && p.truth <= hi(p.pos)) ++hit;
            vars.push_back(se(p.pos) * se(p.pos));
          }
          f << w.name << ',' << p.species << ','
            << (p.recruit ? "recruit" : "death") << ',' << p.name << ','
            << r.omegas[oi] << ','
            << (n > 0 ? static_cast<double>(hit) / n : 0.0) << ','
            << median_of(vars) << ',' << ev << ',' << n << "\n";
        }
      }
    }
  }
  if (r.windows.size() > 1) {
    auto f = open("ratios.csv");
    f << "window,species,model,param,var_ratio_vs_main\n";
    const auto& main_w = r.windows.front();
    const auto refs = param_refs(main_w.cfg);
    for (std::size_t wi = 1; wi < r.windows.size(); ++wi) {
      const auto& w = r.windows[wi];
      for (const auto& p : refs) {
        std::vector<double> a, b;
        for (const auto& rec : main_w.reps)
          if (rec.ok) a.push_back(estimate_of(rec, p));
        for (const auto& rec : w.reps)
          if (rec.ok) b.push_back(estimate_of(rec, p));
        if (a.size() < 2 || b.size() < 2) continue;
        f << w.name << ',' << p.species << ','
          << (p.recruit ? "recruit" : "death") << ',' << p.name << ','
          << var_of(b) / var_of(a) << "\n";
      }
    }
  }
  {
    auto f = open("events.log");
    for (const auto& w : r.windows)
      for (const auto& rec : w.reps)
        if (!rec.ok)
          f << w.name << " rep " << rec.rep << " failed: " << rec.error
            << "\n";
  }
  (void)cfg;
}

}  // namespace forestcl
