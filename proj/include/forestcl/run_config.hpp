#pragma once

#include <optional>
#include <string>
#include <vector>

#include "forestcl/sim.hpp"

namespace forestcl {

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 50;
};

// Dummy-point intensity: either an explicit rho, or `factor` times the
// observed recruit count per unit area (per census), the default rule.
struct DummySpec {
  std::optional<double> rho;
  double factor = 4.0;
  std::uint64_t seed = 0x64756d6d79ULL;
};

struct ExperimentSpec {
  int replicates = 2;
  // Named windows to rerun the study on (e.g. the full window and its
  // half); the main window is always included first as "W".
  std::vector<std::pair<std::string, Window>> extra_windows;
  std::vector<double> omegas = {30, 55, 80};
  double level = 0.95;
};

// The parsed, schema-validated configuration document. Unknown keys are
// rejected at every level.
struct RunConfig {
  Window window{0, 500, 0, 250};
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all hardware threads
  std::string output_dir = "out";

  std::string census_csv;  // input data for fit/variance/diagnostics
  bool allow_missing_marks = false;
  std::string intercepts = "per_census";  // or "shared"
  bool death_include_mark = false;

  InfluenceConfig influence;
  std::vector<std::string> covariate_rasters;
  std::vector<MaternParams> covariate_fields;

  DummySpec dummy;
  std::vector<double> omegas = {55.0};
  double level = 0.95;
  SolverConfig solver;

  bool has_simulation = false;
  SimConfig sim;
  int replicates = 1;

  bool has_experiment = false;
  ExperimentSpec experiment;

  // Diagnostics grids (defaults filled from window scale when empty).
  std::vector<double> pcf_rgrid;
  double pcf_bandwidth = 0.0;  // 0 = Stoyan default
  std::vector<double> variogram_hgrid;
  double variogram_tol = 2.5;

  std::string config_hash;  // 64-bit FNV-1a of the raw document, hex

  static RunConfig load(const std::string& path);
  static RunConfig from_string(const std::string& text);
};

}  // namespace forestcl
