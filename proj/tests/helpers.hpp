#pragma once

// Shared fixtures for the unit suites: a small simulated census series
// with the study's model structure, plus simple moment utilities.

#include <cmath>
#include <numeric>
#include <vector>

#include "forestcl/experiment.hpp"
#include "forestcl/rng.hpp"

namespace fcl_test {

using namespace forestcl;

struct SmallData {
  SimConfig cfg;
  ReplicateResult rr;
  std::vector<std::shared_ptr<const HistoryFrame>> frames;
  RecruitData rdata;  // species 1
  DeathData ddata;    // species 1
};

// A ~60x40 m window, K censuses, study-style parameters but denser
// (higher intercept) so small windows still carry events.
inline SmallData small_sim(int K = 4, std::uint64_t seed = 11,
                           double recruit_intercept = -4.0) {
  SmallData d;
  d.cfg = SimConfig::study_defaults(Window(0, 60, 0, 40), K, seed);
  for (auto& r : d.cfg.recruit) r.beta0.setConstant(recruit_intercept);
  SimEngine engine(d.cfg);
  d.rr = engine.run_replicate(0);
  d.frames = build_frames(d.rr.census, d.rr.covariates);
  DummySpec dummy;
  d.rdata = make_recruit_data(d.frames, d.rr.census, 1, dummy, d.cfg.marks,
                              stream_seed(seed, 0xabc));
  d.ddata = make_death_data(d.frames, d.rr.census, 1);
  return d;
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

inline double sample_var(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

inline double se_of_mean(const std::vector<double>& v) {
  return std::sqrt(sample_var(v) / v.size());
}

}  // namespace fcl_test
