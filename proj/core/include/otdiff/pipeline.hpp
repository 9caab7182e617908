#pragma once

#include <filesystem>

#include "otdiff/run_config.hpp"

namespace otdiff::pipeline {

/// Fixed artifact layout under the run's output directory.
struct Paths {
  std::filesystem::path root;

  std::filesystem::path data() const { return root / "data.bin"; }
  std::filesystem::path latents() const { return root / "latents.bin"; }
  std::filesystem::path potential() const { return root / "potential.bin"; }
  std::filesystem::path potential_json() const { return root / "potential.json"; }
  std::filesystem::path trace_csv() const { return root / "trace.csv"; }
  std::filesystem::path trace_svg() const { return root / "trace.svg"; }
  std::filesystem::path fit_summary() const { return root / "fit_summary.json"; }
  std::filesystem::path batch_ot() const { return root / "samples_ot.bin"; }
  std::filesystem::path batch_ot_csv() const { return root / "samples_ot.csv"; }
  std::filesystem::path batch_vanilla_full() const { return root / "samples_vanilla_full.bin"; }
  std::filesystem::path batch_vanilla_full_csv() const { return root / "samples_vanilla_full.csv"; }
  std::filesystem::path batch_vanilla_trunc() const { return root / "samples_vanilla_trunc.bin"; }
  std::filesystem::path batch_vanilla_trunc_csv() const { return root / "samples_vanilla_trunc.csv"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path report() const { return eval_dir() / "report.json"; }
  std::filesystem::path mmr_csv() const { return eval_dir() / "mmr.csv"; }
  std::filesystem::path moments_csv() const { return eval_dir() / "moments.csv"; }
  std::filesystem::path energy_csv() const { return eval_dir() / "energy_distance.csv"; }
  std::filesystem::path oracle_dir() const { return root / "oracle"; }
  std::filesystem::path oracle_report() const { return oracle_dir() / "oracle_report.json"; }
  std::filesystem::path mc_rate_csv() const { return oracle_dir() / "mc_rate.csv"; }
  std::filesystem::path mc_rate_svg() const { return oracle_dir() / "mc_rate.svg"; }
};

inline Paths paths_for(const RunConfig& cfg) { return Paths{cfg.out_dir}; }

/// Draws (or loads) the dataset and diffuses every point forward M steps.
/// Refuses to overwrite a latent store produced by a different config.
void make_latents(const RunConfig& cfg);

/// Fits the transport potential to the stored latents; writes the potential
/// container, its JSON mirror, the trace CSV/SVG and a fit summary.
void fit(const RunConfig& cfg);

/// Generates the shortcut batch plus the full-trajectory and equal-cost
/// truncated baselines.
void sample(const RunConfig& cfg);

/// Mode-mixture, energy-distance, moment tables and scatter plots.
void evaluate(const RunConfig& cfg);

/// Independent validation: exact 1D solution vs the fitted solver,
/// Monte-Carlo rate experiment, and quadrature check of a fitted 2D
/// potential. Returns true when every check passes.
bool oracle_check(const RunConfig& cfg);

/// Full chain; returns the oracle_check outcome.
bool run_all(const RunConfig& cfg);

}  // namespace otdiff::pipeline
