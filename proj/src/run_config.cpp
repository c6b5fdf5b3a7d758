#include "forestcl/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace forestcl {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed,
                  const std::set<std::string>& required = {}) {
  if (!j.is_object())
    throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  for (const auto& k : required)
    if (!j.contains(k))
      throw ConfigError("config: missing key '" + k + "' in " + where);
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number())
    throw ConfigError("config: '" + where + "' must be a number");
  return j.get<double>();
}

Window parse_window(const json& j, const std::string& where) {
  require_keys(j, where, {"xmin", "xmax", "ymin", "ymax"},
               {"xmin", "xmax", "ymin", "ymax"});
  return Window(get_number(j["xmin"], where + ".xmin"),
                get_number(j["xmax"], where + ".xmax"),
                get_number(j["ymin"], where + ".ymin"),
                get_number(j["ymax"], where + ".ymax"));
}

MaternParams parse_matern(const json& j, const std::string& where) {
  require_keys(j, where, {"sigma2", "nu", "xi"}, {"sigma2", "nu", "xi"});
  return MaternParams(get_number(j["sigma2"], where + ".sigma2"),
                      get_number(j["nu"], where + ".nu"),
                      get_number(j["xi"], where + ".xi"));
}

InfluenceSpec parse_influence_spec(const json& j, const std::string& where) {
  require_keys(j, where, {"kind", "range"}, {"kind", "range"});
  const std::string kind = j["kind"].get<std::string>();
  const double range = get_number(j["range"], where + ".range");
  if (kind == "dispersal") return InfluenceSpec::dispersal(range);
  if (kind == "competition") return InfluenceSpec::competition(range);
  throw ConfigError("config: " + where +
                    ".kind must be 'dispersal' or 'competition'");
}

std::vector<double> parse_grid(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config: '" + where + "' must be a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Like parse_grid but an empty array is fine (e.g. no covariate betas).
Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array())
    throw ConfigError("config: '" + where + "' must be an array");
  Eigen::VectorXd out(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    out(static_cast<int>(i)) =
        get_number(j[i], where + "[" + std::to_string(i) + "]");
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void parse_simulation(const json& j, RunConfig& cfg) {
  cfg.has_simulation = true;
  if (j.contains("study_defaults") && j["study_defaults"].get<bool>()) {
    require_keys(j, "simulation", {"study_defaults", "K", "grid_cellsize"});
    const int K = j.value("K", 10);
    cfg.sim = SimConfig::study_defaults(cfg.window, K, cfg.seed);
    if (j.contains("grid_cellsize"))
      cfg.sim.grid_cellsize = get_number(j["grid_cellsize"],
                                         "simulation.grid_cellsize");
    return;
  }
  require_keys(j, "simulation",
               {"study_defaults", "K", "grid_cellsize", "n_species",
                "lgcp_field", "death_field", "recruit", "death", "marks"},
               {"K", "n_species", "lgcp_field", "death_field", "recruit",
                "death"});
  SimConfig s;
  s.window = cfg.window;
  s.seed = cfg.seed;
  s.K = j["K"].get<int>();
  if (s.K < 0) throw ConfigError("config: simulation.K must be >= 0");
  s.grid_cellsize = j.value("grid_cellsize", 1.0);
  s.n_species = j["n_species"].get<int>();
  s.lgcp_field = parse_matern(j["lgcp_field"], "simulation.lgcp_field");
  s.death_field = parse_matern(j["death_field"], "simulation.death_field");
  s.influence = cfg.influence;
  s.covariate_fields = cfg.covariate_fields;
  const int K_eff = std::max(s.K, 1);
  const int q = static_cast<int>(std::max(cfg.covariate_fields.size(),
                                          cfg.covariate_rasters.size()));
  const int p = s.n_species;
  s.recruit_layout =
      cfg.intercepts == "shared"
          ? DesignLayout::shared_intercept(K_eff, false, q, p)
          : DesignLayout::per_census(K_eff, false, q, p);
  s.death_layout =
      cfg.intercepts == "shared"
          ? DesignLayout::shared_intercept(K_eff, cfg.death_include_mark, q, p)
          : DesignLayout::per_census(K_eff, cfg.death_include_mark, q, p);
  if (!j["recruit"].is_array() ||
      static_cast<int>(j["recruit"].size()) != s.n_species)
    throw ConfigError("config: simulation.recruit must list one parameter "
                      "set per species");
  if (!j["death"].is_array() ||
      static_cast<int>(j["death"].size()) != s.n_species)
    throw ConfigError("config: simulation.death must list one parameter "
                      "set per species");
  for (int l = 0; l < s.n_species; ++l) {
    const json& r = j["recruit"][l];
    require_keys(r, "simulation.recruit[]", {"beta0", "beta", "gamma"},
                 {"beta0", "beta", "gamma"});
    RecruitParams rp;
    rp.beta0 = parse_vector(r["beta0"], "simulation.recruit[].beta0");
    rp.beta = parse_vector(r["beta"], "simulation.recruit[].beta");
    rp.gamma = parse_vector(r["gamma"], "simulation.recruit[].gamma");
    s.recruit.push_back(rp);
    const json& d = j["death"][l];
    require_keys(d, "simulation.death[]", {"beta0", "alpha", "beta", "gamma"},
                 {"beta0", "beta", "gamma"});
    DeathParams dp;
    dp.beta0 = parse_vector(d["beta0"], "simulation.death[].beta0");
    dp.alpha = d.value("alpha", 0.0);
    dp.beta = parse_vector(d["beta"], "simulation.death[].beta");
    dp.gamma = parse_vector(d["gamma"], "simulation.death[].gamma");
    s.death.push_back(dp);
  }
  if (j.contains("marks")) {
    const json& m = j["marks"];
    require_keys(m, "simulation.marks", {"point_mass", "edges", "weights"});
    if (m.contains("point_mass")) {
      s.marks = MarkDensity::point_mass(
          get_number(m["point_mass"], "simulation.marks.point_mass"));
    } else {
      s.marks = MarkDensity::histogram(
          parse_grid(m["edges"], "simulation.marks.edges"),
          parse_grid(m["weights"], "simulation.marks.weights"));
    }
  }
  cfg.sim = std::move(s);
}

}  // namespace

RunConfig RunConfig::from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_keys(j, "top level",
               {"window", "seed", "threads", "output_dir", "census_csv",
                "allow_missing_marks", "intercepts", "death_include_mark",
                "influence", "covariates", "dummy", "omegas", "level",
                "solver", "simulation", "replicates", "experiment",
                "diagnostics"},
               {"window"});

  RunConfig cfg;
  {
    std::ostringstream oss;
    oss << std::hex << fnv1a(j.dump());
    cfg.config_hash = oss.str();
  }
  cfg.window = parse_window(j["window"], "window");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.threads = j.value("threads", 0);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.census_csv = j.value("census_csv", std::string());
  cfg.allow_missing_marks = j.value("allow_missing_marks", false);
  cfg.intercepts = j.value("intercepts", std::string("per_census"));
  if (cfg.intercepts != "per_census" && cfg.intercepts != "shared")
    throw ConfigError("config: intercepts must be 'per_census' or 'shared'");
  cfg.death_include_mark = j.value("death_include_mark", false);
  cfg.replicates = j.value("replicates", 1);
  if (cfg.replicates < 1)
    throw ConfigError("config: replicates must be >= 1");

  if (j.contains("influence")) {
    const json& inf = j["influence"];
    require_keys(inf, "influence", {"recruit", "death", "divide_by_own_mark"},
                 {"recruit", "death"});
    for (std::size_t l = 0; l < inf["recruit"].size(); ++l)
      cfg.influence.recruit.push_back(
          parse_influence_spec(inf["recruit"][l], "influence.recruit[]"));
    for (std::size_t l = 0; l < inf["death"].size(); ++l)
      cfg.influence.death.push_back(
          parse_influence_spec(inf["death"][l], "influence.death[]"));
    if (cfg.influence.recruit.size() != cfg.influence.death.size())
      throw ConfigError(
          "config: influence.recruit and influence.death must have the same "
          "length (one entry per species)");
    cfg.influence.divide_by_own_mark = inf.value("divide_by_own_mark", true);
  }

  if (j.contains("covariates")) {
    const json& cov = j["covariates"];
    require_keys(cov, "covariates", {"rasters", "fields"});
    if (cov.contains("rasters") && cov.contains("fields"))
      throw ConfigError("config: give covariates.rasters or .fields, not both");
    if (cov.contains("rasters"))
      for (const auto& p : cov["rasters"])
        cfg.covariate_rasters.push_back(p.get<std::string>());
    if (cov.contains("fields"))
      for (std::size_t i = 0; i < cov["fields"].size(); ++i)
        cfg.covariate_fields.push_back(
            parse_matern(cov["fields"][i], "covariates.fields[]"));
  }

  if (j.contains("dummy")) {
    const json& d = j["dummy"];
    require_keys(d, "dummy", {"rho", "factor", "seed"});
    if (d.contains("rho")) {
      cfg.dummy.rho = get_number(d["rho"], "dummy.rho");
      if (!(*cfg.dummy.rho > 0))
        throw ConfigError("config: dummy.rho must be > 0");
    }
    cfg.dummy.factor = d.value("factor", 4.0);
    if (!(cfg.dummy.factor > 0))
      throw ConfigError("config: dummy.factor must be > 0");
    if (d.contains("seed")) cfg.dummy.seed = d["seed"].get<std::uint64_t>();
  }

  if (j.contains("omegas")) cfg.omegas = parse_grid(j["omegas"], "omegas");
  for (double w : cfg.omegas)
    if (w < 0) throw ConfigError("config: omegas must be >= 0");
  cfg.level = j.value("level", 0.95);
  if (!(cfg.level > 0) || !(cfg.level < 1))
    throw ConfigError("config: level must be in (0, 1)");

  if (j.contains("solver")) {
    const json& s = j["solver"];
    require_keys(s, "solver", {"tol", "max_iter"});
    cfg.solver.tol = s.value("tol", 1e-8);
    cfg.solver.max_iter = s.value("max_iter", 50);
    if (!(cfg.solver.tol > 0) || cfg.solver.max_iter < 1)
      throw ConfigError("config: solver.tol must be > 0, max_iter >= 1");
  }

  if (j.contains("simulation")) parse_simulation(j["simulation"], cfg);

  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    require_keys(e, "experiment",
                 {"replicates", "extra_windows", "omegas", "level"},
                 {"replicates"});
    cfg.has_experiment = true;
    cfg.experiment.replicates = e["replicates"].get<int>();
    if (cfg.experiment.replicates < 2)
      throw ConfigError("config: experiment.replicates must be >= 2");
    if (e.contains("extra_windows")) {
      for (const auto& w : e["extra_windows"]) {
        require_keys(w, "experiment.extra_windows[]", {"name", "window"},
                     {"name", "window"});
        cfg.experiment.extra_windows.emplace_back(
            w["name"].get<std::string>(),
            parse_window(w["window"], "experiment.extra_windows[].window"));
      }
    }
    if (e.contains("omegas"))
      cfg.experiment.omegas = parse_grid(e["omegas"], "experiment.omegas");
    cfg.experiment.level = e.value("level", cfg.level);
  }

  if (j.contains("diagnostics")) {
    const json& d = j["diagnostics"];
    require_keys(d, "diagnostics",
                 {"rgrid", "bandwidth", "hgrid", "tol"});
    if (d.contains("rgrid"))
      cfg.pcf_rgrid = parse_grid(d["rgrid"], "diagnostics.rgrid");
    cfg.pcf_bandwidth = d.value("bandwidth", 0.0);
    if (d.contains("hgrid"))
      cfg.variogram_hgrid = parse_grid(d["hgrid"], "diagnostics.hgrid");
    cfg.variogram_tol = d.value("tol", 2.5);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream oss;
  oss << in.rdbuf();
  return from_string(oss.str());
}

}  // namespace forestcl
