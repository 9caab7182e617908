#include "otdiff/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "otdiff/common.hpp"
#include "otdiff/parallel.hpp"
#include "otdiff/rng.hpp"

namespace otdiff {

namespace {

void check_sampler_inputs(const DiffusionSchedule& sched, const ScoreProvider& score,
                          const SamplerConfig& cfg) {
  if (cfg.reverse_steps == 0 || cfg.reverse_steps >= sched.steps()) {
    throw ConfigError("sampler: need 0 < M < T");
  }
  if (score.max_step() < cfg.reverse_steps) {
    throw ConfigError("sampler: score provider does not cover the reverse steps");
  }
}

// Reverse tail t_start..1 in place. Noise is keyed by (seed, sample, t) so
// coupled runs see identical draws; z = 0 at the final step.
void reverse_tail(std::vector<double>& x, std::size_t t_start, const DiffusionSchedule& sched,
                  const ScoreProvider& score, ReverseVariant variant, std::uint64_t seed,
                  std::size_t sample_index) {
  const std::size_t d = x.size();
  std::vector<double> s(d);
  std::vector<double> z(d, 0.0);
  const std::uint64_t tail_seed = derive_seed(seed, SeedLane::SamplerTail, sample_index);
  for (std::size_t t = t_start; t >= 1; --t) {
    if (t > 1) {
      Rng rng(derive_seed(tail_seed, static_cast<std::uint64_t>(SeedLane::SamplerTail), t));
      rng.fill_normal(z);
    } else {
      std::fill(z.begin(), z.end(), 0.0);
    }
    score.score(x, t, s);
    reverse_step(x, t, sched, s, z, x, variant);
    if (!all_finite(x)) {
      Trajectory dump(d);
      dump.append(static_cast<std::int64_t>(t) - 1, x);
      throw SamplerNumericError("sampler: non-finite state in reverse tail", std::move(dump));
    }
  }
}

}  // namespace

SampleBatch ot_sample(const BrenierPotential& potential, const DiffusionSchedule& sched,
                      const ScoreProvider& score, const SamplerConfig& cfg, std::size_t n) {
  check_sampler_inputs(sched, score, cfg);
  if (potential.dim() != score.dim()) throw ConfigError("ot_sample: dimension mismatch");

  const auto& prov = potential.provenance();
  if (prov.m_steps != 0 || prov.schedule_digest != 0) {
    if (prov.m_steps != cfg.reverse_steps) {
      throw ConfigError("ot_sample: potential was fitted for a different M");
    }
    if (prov.schedule_digest != sched.digest()) {
      throw ConfigError("ot_sample: potential was fitted under a different schedule");
    }
  }

  const std::size_t d = potential.dim();
  SampleBatch batch;
  batch.dim = d;
  batch.data.resize(n * d);
  batch.seed = cfg.seed;
  batch.config_digest = cfg.config_digest;
  batch.score_evals_per_sample = cfg.reverse_steps;

  parallel_for_chunks(n, 256, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> x(d);
    for (std::size_t j = begin; j < end; ++j) {
      Rng init(derive_seed(cfg.seed, SeedLane::SamplerInit, j));
      init.fill_normal(x);
      const std::span<const double> latent = potential.ot_map(x);
      std::vector<double> state(latent.begin(), latent.end());
      reverse_tail(state, cfg.reverse_steps, sched, score, cfg.variant, cfg.seed, j);
      std::copy(state.begin(), state.end(), batch.data.begin() + static_cast<std::ptrdiff_t>(j * d));
    }
  });
  return batch;
}

SampleBatch vanilla_sample(const DiffusionSchedule& sched, const ScoreProvider& score,
                           const SamplerConfig& cfg, std::size_t n, std::size_t t_start) {
  if (t_start < 1 || t_start > sched.steps()) throw ConfigError("vanilla_sample: bad t_start");
  if (score.max_step() < t_start) {
    throw ConfigError("vanilla_sample: score provider does not cover t_start");
  }

  const std::size_t d = score.dim();
  const double init_std = std::sqrt(sched.marginal_variance(t_start));

  SampleBatch batch;
  batch.dim = d;
  batch.data.resize(n * d);
  batch.seed = cfg.seed;
  batch.config_digest = cfg.config_digest;
  batch.score_evals_per_sample = t_start;

  parallel_for_chunks(n, 256, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> x(d);
    for (std::size_t j = begin; j < end; ++j) {
      Rng init(derive_seed(cfg.seed, SeedLane::SamplerInit, j));
      init.fill_normal(x);
      for (double& v : x) v *= init_std;
      reverse_tail(x, t_start, sched, score, cfg.variant, cfg.seed, j);
      std::copy(x.begin(), x.end(), batch.data.begin() + static_cast<std::ptrdiff_t>(j * d));
    }
  });
  return batch;
}

double perturbation_probe(const BrenierPotential& potential, const DiffusionSchedule& sched,
                          const ScoreProvider& score, const SamplerConfig& cfg,
                          std::span<const double> zeta, std::size_t n) {
  check_sampler_inputs(sched, score, cfg);
  if (zeta.size() != potential.dim()) throw InputError("perturbation_probe: zeta dimension");
  const double zeta_norm = norm(zeta);
  if (!(zeta_norm > 0.0)) throw InputError("perturbation_probe: zeta must be nonzero");

  const std::size_t d = potential.dim();
  const std::size_t m = cfg.reverse_steps;

  constexpr std::size_t kChunk = 64;
  const std::size_t n_chunks = chunk_count(n, kChunk);
  std::vector<double> chunk_max(n_chunks, 0.0);

  parallel_for_chunks(n, kChunk, cfg.threads,
                      [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    double worst = 0.0;
    std::vector<double> x(d), base(d), pert(d), s(d), z(d), diff(d);
    for (std::size_t j = begin; j < end; ++j) {
      Rng init(derive_seed(cfg.seed, SeedLane::SamplerInit, j));
      init.fill_normal(x);
      const std::span<const double> latent = potential.ot_map(x);
      std::copy(latent.begin(), latent.end(), base.begin());
      for (std::size_t k = 0; k < d; ++k) pert[k] = base[k] + zeta[k];

      const std::uint64_t tail_seed = derive_seed(cfg.seed, SeedLane::SamplerTail, j);
      for (std::size_t t = m; t >= 1; --t) {
        if (t > 1) {
          Rng rng(derive_seed(tail_seed, static_cast<std::uint64_t>(SeedLane::SamplerTail), t));
          rng.fill_normal(z);
        } else {
          std::fill(z.begin(), z.end(), 0.0);
        }
        score.score(base, t, s);
        reverse_step(base, t, sched, s, z, base, cfg.variant);
        score.score(pert, t, s);
        reverse_step(pert, t, sched, s, z, pert, cfg.variant);
        for (std::size_t k = 0; k < d; ++k) diff[k] = pert[k] - base[k];
        worst = std::max(worst, norm(diff) / zeta_norm);
      }
    }
    chunk_max[chunk] = worst;
  });

  double ratio = 0.0;
  for (double v : chunk_max) ratio = std::max(ratio, v);
  return ratio;
}

}  // namespace otdiff
