#include "otdiff/run_config.hpp"

#include <fstream>

#include "otdiff/digest.hpp"
#include "otdiff/rng.hpp"

namespace otdiff {

namespace {

GaussianMixture gmm_from_spec(const nlohmann::json& spec) {
  std::vector<GmmComponent> comps;
  for (const auto& cj : spec.at("components")) {
    GmmComponent c;
    c.weight = cj.at("weight").get<double>();
    c.mean = cj.at("mean").get<std::vector<double>>();
    c.stddev = cj.at("std").get<double>();
    comps.push_back(std::move(c));
  }
  return GaussianMixture(std::move(comps));
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.name = j.value("name", c.name);
    c.seed = j.value("seed", c.seed);
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    c.threads = j.value("threads", c.threads);

    if (j.contains("data")) {
      const auto& d = j.at("data");
      const std::string kind = d.value("kind", "gmm");
      if (kind == "gmm") {
        c.data_kind = DataKind::Gmm;
        c.gmm_spec = d.at("gmm");
      } else if (kind == "points") {
        c.data_kind = DataKind::Points;
        c.points_path = d.at("path").get<std::string>();
      } else {
        throw ConfigError("config: unknown data kind '" + kind + "'");
      }
      c.data_count = d.value("count", c.data_count);
    }

    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      const std::string kind = s.value("kind", "ve");
      if (kind == "ve") {
        c.schedule_kind = ScheduleKind::VarianceExploding;
      } else if (kind == "vp") {
        c.schedule_kind = ScheduleKind::VariancePreserving;
      } else {
        throw ConfigError("config: unknown schedule kind '" + kind + "'");
      }
      c.schedule_steps = s.value("steps", c.schedule_steps);
      c.sigma_min = s.value("sigma_min", c.sigma_min);
      c.sigma_max = s.value("sigma_max", c.sigma_max);
      c.beta_min = s.value("beta_min", c.beta_min);
      c.beta_max = s.value("beta_max", c.beta_max);
    }

    c.m_steps = j.value("m_steps", c.m_steps);

    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.n_samples = s.value("n_samples", c.solver.n_samples);
      c.solver.lr = s.value("lr", c.solver.lr);
      c.solver.stall_window = s.value("stall_window", c.solver.stall_window);
      c.solver.tol = s.value("tol", c.solver.tol);
      c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
      c.solver.adam_beta1 = s.value("adam_beta1", c.solver.adam_beta1);
      c.solver.adam_beta2 = s.value("adam_beta2", c.solver.adam_beta2);
      c.solver.n_samples_cap = s.value("n_samples_cap", c.solver.n_samples_cap);
    }

    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      c.sample_count = s.value("count", c.sample_count);
      const std::string variant = s.value("variant", "general");
      if (variant == "general") {
        c.variant = ReverseVariant::General;
      } else if (variant == "langevin") {
        c.variant = ReverseVariant::Langevin;
      } else {
        throw ConfigError("config: unknown sampler variant '" + variant + "'");
      }
    }

    if (j.contains("score")) {
      const auto& s = j.at("score");
      const std::string kind = s.value("kind", "gmm-oracle");
      if (kind == "gmm-oracle") {
        c.score_kind = ScoreKind::GmmOracle;
      } else if (kind == "tabulated") {
        c.score_kind = ScoreKind::Tabulated;
        c.score_path = s.at("path").get<std::string>();
      } else {
        throw ConfigError("config: unknown score kind '" + kind + "'");
      }
    }

    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      c.lambdas = e.value("lambdas", c.lambdas);
      c.fresh_count = e.value("fresh_count", c.fresh_count);
      c.permutations = e.value("permutations", c.permutations);
      c.null_quantile = e.value("quantile", c.null_quantile);
    }

    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      c.grid_resolution = o.value("grid_resolution", c.grid_resolution);
      c.grid_extent = o.value("grid_extent", c.grid_extent);
      c.mc_rate_seeds = o.value("mc_seeds", c.mc_rate_seeds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  RunConfig c = from_json(j);
  c.config_dir = path.parent_path();
  return c;
}

void RunConfig::validate() const {
  if (schedule_steps < 2) throw ConfigError("config: schedule needs at least 2 steps");
  if (m_steps == 0 || m_steps >= schedule_steps) throw ConfigError("config: need 0 < M < T");
  if (data_kind == DataKind::Gmm && gmm_spec.is_null()) {
    throw ConfigError("config: gmm data requires a gmm spec");
  }
  if (data_count == 0) throw ConfigError("config: data count must be positive");
  if (sample_count == 0) throw ConfigError("config: sample count must be positive");
  for (double l : lambdas) {
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("config: lambda outside (0,1)");
  }
  if (!(null_quantile > 0.0 && null_quantile < 1.0)) {
    throw ConfigError("config: quantile outside (0,1)");
  }
  solver.validate();
}

nlohmann::json RunConfig::canonical_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["seed"] = seed;
  j["data"]["kind"] = data_kind == DataKind::Gmm ? "gmm" : "points";
  j["data"]["count"] = data_count;
  if (data_kind == DataKind::Gmm) {
    j["data"]["gmm"] = gmm_spec;
  } else {
    j["data"]["path"] = points_path.generic_string();
  }
  j["schedule"]["kind"] = schedule_kind == ScheduleKind::VarianceExploding ? "ve" : "vp";
  j["schedule"]["steps"] = schedule_steps;
  if (schedule_kind == ScheduleKind::VarianceExploding) {
    j["schedule"]["sigma_min"] = sigma_min;
    j["schedule"]["sigma_max"] = sigma_max;
  } else {
    j["schedule"]["beta_min"] = beta_min;
    j["schedule"]["beta_max"] = beta_max;
  }
  j["m_steps"] = m_steps;
  j["solver"]["n_samples"] = solver.n_samples;
  j["solver"]["lr"] = solver.lr;
  j["solver"]["stall_window"] = solver.stall_window;
  j["solver"]["tol"] = solver.tol;
  j["solver"]["max_iters"] = solver.max_iters;
  j["solver"]["adam_beta1"] = solver.adam_beta1;
  j["solver"]["adam_beta2"] = solver.adam_beta2;
  j["solver"]["n_samples_cap"] = solver.n_samples_cap;
  j["sampler"]["count"] = sample_count;
  j["sampler"]["variant"] = variant == ReverseVariant::General ? "general" : "langevin";
  j["score"]["kind"] = score_kind == ScoreKind::GmmOracle ? "gmm-oracle" : "tabulated";
  if (score_kind == ScoreKind::Tabulated) j["score"]["path"] = score_path.generic_string();
  j["eval"]["lambdas"] = lambdas;
  j["eval"]["fresh_count"] = fresh_count;
  j["eval"]["permutations"] = permutations;
  j["eval"]["quantile"] = null_quantile;
  j["oracle"]["grid_resolution"] = grid_resolution;
  j["oracle"]["grid_extent"] = grid_extent;
  j["oracle"]["mc_seeds"] = mc_rate_seeds;
  return j;
}

std::uint64_t RunConfig::digest() const { return fnv1a64(canonical_json().dump()); }

DiffusionSchedule RunConfig::make_schedule() const {
  if (schedule_kind == ScheduleKind::VarianceExploding) {
    return DiffusionSchedule::variance_exploding(schedule_steps, sigma_min, sigma_max);
  }
  return DiffusionSchedule::variance_preserving(schedule_steps, beta_min, beta_max);
}

GaussianMixture RunConfig::make_gmm() const {
  if (data_kind != DataKind::Gmm) throw ConfigError("config: data is not a mixture");
  return gmm_from_spec(gmm_spec);
}

SolverConfig RunConfig::make_solver_config() const {
  SolverConfig s = solver;
  s.seed = derive_seed(seed, SeedLane::VolumeEstimate);
  s.threads = threads;
  return s;
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  if (p.is_absolute() || config_dir.empty()) return p;
  return config_dir / p;
}

}  // namespace otdiff
