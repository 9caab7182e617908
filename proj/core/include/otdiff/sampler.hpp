#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "otdiff/brenier.hpp"
#include "otdiff/common.hpp"
#include "otdiff/diffusion.hpp"
#include "otdiff/schedule.hpp"
#include "otdiff/score_provider.hpp"

namespace otdiff {

struct SamplerConfig {
  std::size_t reverse_steps = 10;  // M, with 0 < M < T
  ReverseVariant variant = ReverseVariant::General;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::uint64_t config_digest = 0;  // stamped into batches for provenance
};

struct SampleBatch {
  std::size_t dim = 0;
  std::vector<double> data;  // n x dim, row-major
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;
  std::size_t score_evals_per_sample = 0;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

class SamplerNumericError : public NumericError {
 public:
  SamplerNumericError(const std::string& what, Trajectory trajectory)
      : NumericError(what), trajectory(std::move(trajectory)) {}
  Trajectory trajectory;
};

/// Shortcut sampler: draw x_T ~ N(0, I), jump to the latent set through the
/// fitted transport map, then run M reverse steps (z = 0 on the last one).
/// Exactly M score evaluations per sample. The potential's provenance, when
/// present, must match the schedule digest and M.
SampleBatch ot_sample(const BrenierPotential& potential, const DiffusionSchedule& sched,
                      const ScoreProvider& score, const SamplerConfig& cfg, std::size_t n);

/// Baseline: start at x_{t_start} ~ N(0, marginal_variance(t_start) I) and
/// reverse all the way to x_0. t_start = T is the full-trajectory baseline;
/// t_start = M gives the equal-cost truncated baseline.
SampleBatch vanilla_sample(const DiffusionSchedule& sched, const ScoreProvider& score,
                           const SamplerConfig& cfg, std::size_t n, std::size_t t_start);

/// Empirical stability probe: runs the reverse tail twice with identical
/// noise, from x_M and from x_M + zeta, and returns the largest ratio
/// ||x~_t - x_t|| / ||zeta|| over steps and samples.
double perturbation_probe(const BrenierPotential& potential, const DiffusionSchedule& sched,
                          const ScoreProvider& score, const SamplerConfig& cfg,
                          std::span<const double> zeta, std::size_t n);

}  // namespace otdiff
