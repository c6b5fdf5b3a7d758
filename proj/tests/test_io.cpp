#include <sstream>

#include "doctest.h"
#include "forestcl/census_io.hpp"
#include "forestcl/run_config.hpp"
#include "helpers.hpp"

using namespace forestcl;
using namespace fcl_test;

namespace {

CensusRow row(std::int64_t id, int sp, double x, double y, double m, int k) {
  CensusRow r;
  r.tree_id = id;
  r.species = sp;
  r.x = x;
  r.y = y;
  r.mark = m;
  r.census_index = k;
  return r;
}

}  // namespace

TEST_CASE("census csv round trip on simulated data") {
  auto d = small_sim(3, 31);
  CensusTable t = to_table(d.rr.census);
  std::ostringstream out;
  t.write_csv(out);
  std::istringstream in(out.str());
  CensusTable back = CensusTable::read_csv(in);
  REQUIRE(back.rows.size() == t.rows.size());

  Window w(0, 60, 0, 40);
  IngestResult r = ingest_census(back, w, false);
  REQUIRE(r.census.size() == d.rr.census.size());
  REQUIRE(r.n_species == 2);
  for (std::size_t k = 0; k < r.census.size(); ++k)
    for (std::size_t l = 0; l < r.census[k].size(); ++l) {
      REQUIRE(r.census[k][l].size() == d.rr.census[k][l].size());
      // Same id set; coordinates bit-exact through %.17g.
      for (std::size_t i = 0; i < r.census[k][l].size(); ++i) {
        const auto& a = r.census[k][l][i];
        bool found = false;
        for (const auto& b : d.rr.census[k][l].points())
          if (b.id == a.id) {
            found = true;
            CHECK((a.u - b.u).norm() == 0.0);
            CHECK(a.m == b.m);
          }
        CHECK(found);
      }
    }
}

TEST_CASE("recruits and deaths from a two-census toy table") {
  Window w(0, 10, 0, 10);
  CensusTable t;
  t.rows = {row(1, 1, 1, 1, 1, 0), row(2, 1, 2, 2, 1, 0),
            row(3, 1, 3, 3, 1, 0),
            // census 1: 1 and 2 survive, 3 dies, 4 recruits
            row(1, 1, 1, 1, 1, 1), row(2, 1, 2, 2, 1, 1),
            row(4, 1, 4, 4, 1, 1)};
  IngestResult r = ingest_census(t, w, false);
  REQUIRE(r.census.size() == 2);
  CHECK(r.recruits[0].empty());
  REQUIRE(r.recruits[1][0].size() == 1);
  CHECK(r.recruits[1][0][0].id == 4);
  REQUIRE(r.deaths[1][0].size() == 1);
  CHECK(r.deaths[1][0][0].id == 3);
  CHECK(r.report.find("census 1") != std::string::npos);
}

TEST_CASE("census table validation") {
  Window w(0, 10, 0, 10);
  SUBCASE("duplicate (id, census) names both rows") {
    CensusTable t;
    t.rows = {row(7, 1, 1, 1, 1, 0), row(8, 1, 2, 2, 1, 0),
              row(7, 1, 3, 3, 1, 0)};
    try {
      ingest_census(t, w, false);
      FAIL("expected a duplicate-id error");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("7") != std::string::npos);
      CHECK(msg.find("row") != std::string::npos);
    }
  }
  SUBCASE("points outside the window are listed") {
    CensusTable t;
    t.rows = {row(1, 1, 1, 1, 1, 0), row(2, 1, 11, 5, 1, 0)};
    try {
      ingest_census(t, w, false);
      FAIL("expected an out-of-window error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
  }
  SUBCASE("missing marks need explicit permission") {
    CensusTable t;
    auto r0 = row(1, 1, 1, 1, 1, 0);
    r0.mark_missing = true;
    t.rows = {r0};
    CHECK_THROWS_AS(ingest_census(t, w, false), DataError);
    IngestResult ok = ingest_census(t, w, true);
    CHECK(ok.census[0][0][0].m == 1.0);
  }
  SUBCASE("bad header and bad fields") {
    std::istringstream bad("id,species,x,y\n1,1,0.5,0.5\n");
    CHECK_THROWS_AS(CensusTable::read_csv(bad), DataError);
    std::istringstream nonnum(
        "tree_id,species,x,y,mark,census_index\nabc,1,0.5,0.5,1,0\n");
    CHECK_THROWS_AS(CensusTable::read_csv(nonnum), DataError);
  }
  SUBCASE("empty mark field round trips as missing") {
    std::istringstream in(
        "tree_id,species,x,y,mark,census_index\n5,2,0.5,0.25,,0\n");
    CensusTable t = CensusTable::read_csv(in);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].mark_missing);
    CHECK(t.rows[0].species == 2);
    std::ostringstream out;
    t.write_csv(out);
    CHECK(out.str().find(",,") != std::string::npos);
  }
}

TEST_CASE("run config parsing") {
  const std::string base = R"({
    "window": {"xmin": 0, "xmax": 500, "ymin": 0, "ymax": 250},
    "seed": 17,
    "intercepts": "shared",
    "influence": {
      "recruit": [{"kind": "dispersal", "range": 6},
                  {"kind": "dispersal", "range": 6}],
      "death": [{"kind": "competition", "range": 10},
                {"kind": "competition", "range": 10}]
    },
    "covariates": {"fields": [{"sigma2": 0.1111111, "nu": 0.5, "xi": 28},
                              {"sigma2": 0.1111111, "nu": 1.75, "xi": 16}]},
    "dummy": {"factor": 4.0},
    "omegas": [30, 55, 80],
    "simulation": {"study_defaults": true, "K": 10},
    "experiment": {"replicates": 200,
                   "extra_windows": [{"name": "W_half",
                                      "window": {"xmin": 0, "xmax": 250,
                                                 "ymin": 0, "ymax": 125}}]}
  })";

  SUBCASE("valid document") {
    RunConfig cfg = RunConfig::from_string(base);
    CHECK(cfg.seed == 17);
    CHECK(cfg.window.xmax == 500);
    CHECK(cfg.intercepts == "shared");
    CHECK(cfg.influence.n_species() == 2);
    CHECK(cfg.covariate_fields.size() == 2);
    CHECK(cfg.omegas == std::vector<double>{30, 55, 80});
    CHECK(cfg.has_simulation);
    CHECK(cfg.sim.K == 10);
    CHECK(cfg.has_experiment);
    CHECK(cfg.experiment.replicates == 200);
    REQUIRE(cfg.experiment.extra_windows.size() == 1);
    CHECK(cfg.experiment.extra_windows[0].first == "W_half");
    CHECK(!cfg.config_hash.empty());
    // The hash is a pure function of the document.
    CHECK(RunConfig::from_string(base).config_hash == cfg.config_hash);
    std::string other = base;
    other.replace(other.find("\"seed\": 17"), 10, "\"seed\": 18");
    CHECK(RunConfig::from_string(other).config_hash != cfg.config_hash);
  }
  SUBCASE("unknown keys rejected at every level") {
    CHECK_THROWS_AS(RunConfig::from_string(
                        R"({"window": {"xmin":0,"xmax":1,"ymin":0,"ymax":1},
                            "bogus": 1})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(
                        R"({"window": {"xmin":0,"xmax":1,"ymin":0,"ymax":1,
                                       "zmin": 0}})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(
                        R"({"window": {"xmin":0,"xmax":1,"ymin":0,"ymax":1},
                            "dummy": {"rho": 1, "extra": 2}})"),
                    ConfigError);
  }
  SUBCASE("value validation") {
    CHECK_THROWS_AS(RunConfig::from_string("{not json"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(R"({"window":
        {"xmin": 1, "xmax": 0, "ymin": 0, "ymax": 1}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(R"({"window":
        {"xmin": 0, "xmax": 1, "ymin": 0, "ymax": 1},
        "intercepts": "both"})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(R"({"window":
        {"xmin": 0, "xmax": 1, "ymin": 0, "ymax": 1},
        "dummy": {"rho": -1}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(R"({"window":
        {"xmin": 0, "xmax": 1, "ymin": 0, "ymax": 1},
        "level": 1.5})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(R"({"window":
        {"xmin": 0, "xmax": 1, "ymin": 0, "ymax": 1},
        "covariates": {"rasters": ["a.asc"],
                       "fields": [{"sigma2": 1, "nu": 1, "xi": 1}]}})"),
                    ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string(R"({"window":
        {"xmin": 0, "xmax": 1, "ymin": 0, "ymax": 1},
        "experiment": {"replicates": 1}})"), ConfigError);
  }
  SUBCASE("manual simulation block") {
    const std::string manual = R"({
      "window": {"xmin": 0, "xmax": 60, "ymin": 0, "ymax": 40},
      "influence": {"recruit": [{"kind": "dispersal", "range": 6}],
                    "death": [{"kind": "competition", "range": 10}]},
      "simulation": {
        "K": 2, "n_species": 1,
        "lgcp_field": {"sigma2": 1, "nu": 1.75, "xi": 4},
        "death_field": {"sigma2": 1, "nu": 0.5, "xi": 7},
        "recruit": [{"beta0": [-4.5, -4.5], "beta": [], "gamma": [0.1]}],
        "death": [{"beta0": [-0.25, -0.25], "beta": [], "gamma": [-0.25]}],
        "marks": {"point_mass": 1.0}
      }
    })";
    RunConfig cfg = RunConfig::from_string(manual);
    CHECK(cfg.sim.n_species == 1);
    CHECK(cfg.sim.recruit[0].beta0(0) == -4.5);
    CHECK(cfg.sim.marks.is_point_mass());
    // The parsed simulation actually runs.
    auto r = run_replicate(cfg.sim, 0);
    CHECK(r.census.size() == 3);
  }
}
