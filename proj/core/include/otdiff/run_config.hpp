#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "otdiff/diffusion.hpp"
#include "otdiff/gmm.hpp"
#include "otdiff/schedule.hpp"
#include "otdiff/sdot.hpp"

namespace otdiff {

/// Parsed experiment configuration. The canonical JSON form (defaults filled
/// in, keys sorted, out_dir/threads excluded) is what gets digested; every
/// artifact carries that digest so stages can refuse mismatched inputs.
struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  unsigned threads = 0;

  // data
  enum class DataKind { Gmm, Points };
  DataKind data_kind = DataKind::Gmm;
  std::size_t data_count = 1000;
  std::filesystem::path points_path;  // DataKind::Points
  nlohmann::json gmm_spec;            // DataKind::Gmm

  // schedule
  ScheduleKind schedule_kind = ScheduleKind::VarianceExploding;
  std::size_t schedule_steps = 100;
  double sigma_min = 0.01, sigma_max = 5.0;
  double beta_min = 1e-4, beta_max = 0.02;

  std::size_t m_steps = 10;

  SolverConfig solver;  // seed/threads are filled from the master values

  // sampler
  std::size_t sample_count = 10000;
  ReverseVariant variant = ReverseVariant::General;

  // score provider
  enum class ScoreKind { GmmOracle, Tabulated };
  ScoreKind score_kind = ScoreKind::GmmOracle;
  std::filesystem::path score_path;

  // eval
  std::vector<double> lambdas = {0.1, 0.2};
  std::size_t fresh_count = 0;  // 0 -> sample_count
  std::size_t permutations = 99;
  double null_quantile = 0.95;

  // oracle checks
  std::size_t grid_resolution = 1000;
  double grid_extent = 6.0;
  std::size_t mc_rate_seeds = 30;

  std::filesystem::path config_dir;  // directory of the source file, for relative paths

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);

  void validate() const;

  nlohmann::json canonical_json() const;
  std::uint64_t digest() const;

  DiffusionSchedule make_schedule() const;
  GaussianMixture make_gmm() const;  // DataKind::Gmm only
  SolverConfig make_solver_config() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

}  // namespace otdiff
