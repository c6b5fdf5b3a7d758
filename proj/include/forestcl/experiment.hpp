#pragma once

#include <string>
#include <vector>

#include "forestcl/run_config.hpp"
#include "forestcl/sandwich.hpp"

namespace forestcl {

// Frames H_0..H_{K-1} for a census series (indexing shared by the
// recruit and death models; frame k conditions census k+1).
std::vector<std::shared_ptr<const HistoryFrame>> build_frames(
    const std::vector<std::vector<PointPattern>>& census,
    const std::vector<std::shared_ptr<const RasterField>>& covariates);

// Fitting inputs for one species derived from a census series. Recruits
// and deaths are identified by persistent id; dummy intensity follows
// `dummy` (explicit rho, or factor * recruits per unit area per census).
RecruitData make_recruit_data(
    const std::vector<std::shared_ptr<const HistoryFrame>>& frames,
    const std::vector<std::vector<PointPattern>>& census, int species,
    const DummySpec& dummy, const MarkDensity& marks, std::uint64_t seed);

DeathData make_death_data(
    const std::vector<std::shared_ptr<const HistoryFrame>>& frames,
    const std::vector<std::vector<PointPattern>>& census, int species);

struct ExperimentConfig {
  SimConfig base;  // window, parameters, master seed
  int replicates = 2;
  std::vector<std::pair<std::string, Window>> extra_windows;
  std::vector<double> omegas = {30, 55, 80};
  double level = 0.95;
  int threads = 0;
  DummySpec dummy;
  SolverConfig solver;
};

// Per-species, per-model results of one replicate.
struct SpeciesFit {
  Eigen::VectorXd recruit_theta, death_theta;
  // Indexed [omega][param]:
  std::vector<Eigen::VectorXd> recruit_se, death_se;
  std::vector<Eigen::VectorXd> recruit_lo, recruit_hi, death_lo, death_hi;
};

struct ReplicateRecord {
  int rep = 0;
  bool ok = false;
  std::string error;
  std::vector<SpeciesFit> species;
};

struct WindowStudy {
  std::string name;
  Window window{0, 1, 0, 1};
  SimConfig cfg;  // base with this window
  std::vector<ReplicateRecord> reps;
  int n_failed = 0;
};

struct ExperimentResult {
  std::vector<WindowStudy> windows;  // main window first
  std::vector<double> omegas;
  double level = 0.95;
};

// Fit + sandwich for one simulated replicate (used by the harness and
// the acceptance checks).
ReplicateRecord fit_replicate(const SimEngine& engine, int rep,
                              const std::vector<double>& omegas, double level,
                              const DummySpec& dummy,
                              const SolverConfig& solver);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Emit the study tables: estimates.csv, variance.csv, summary.csv,
// coverage.csv, ratios.csv, events.log. Every file starts with a
// provenance comment line.
void write_experiment_csvs(const ExperimentResult& r,
                           const ExperimentConfig& cfg,
                           const std::string& out_dir,
                           const std::string& provenance);

}  // namespace forestcl
