#include "otdiff/sdot.hpp"

#include <algorithm>
#include <cmath>

#include "otdiff/parallel.hpp"
#include "otdiff/rng.hpp"

namespace otdiff {

void SolverConfig::validate() const {
  if (!(lr > 0.0)) throw InputError("SolverConfig: lr must be positive");
  if (stall_window == 0) throw InputError("SolverConfig: stall_window must be positive");
  if (!(tol > 0.0)) throw InputError("SolverConfig: tol must be positive");
  if (max_iters == 0) throw InputError("SolverConfig: max_iters must be positive");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw InputError("SolverConfig: adam betas must lie in (0,1)");
  }
  if (n_samples_cap == 0) throw InputError("SolverConfig: n_samples_cap must be positive");
}

void SolverTrace::write_csv(std::ostream& out) const {
  out << "iteration,energy,max_dev,n_samples,lr\n";
  for (const TraceRecord& r : records) {
    out << r.iteration << "," << format_double(r.energy) << "," << format_double(r.max_dev)
        << "," << r.n_samples << "," << format_double(r.lr) << "\n";
  }
}

std::vector<std::size_t> count_cells(const UpperEnvelope& envelope, std::span<const double> heights,
                                     std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n == 0) throw InputError("count_cells: n must be positive");
  const std::size_t cells = envelope.size();
  const std::size_t dim = envelope.dim();

  constexpr std::size_t kChunk = 4096;
  const std::size_t n_chunks = chunk_count(n, kChunk);
  // Per-chunk counts merged in chunk order: integer sums, so the result is
  // identical for any worker count.
  std::vector<std::vector<std::size_t>> partial(n_chunks);

  parallel_for_chunks(n, kChunk, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<std::size_t> local(cells, 0);
    std::vector<double> x(dim);
    for (std::size_t j = begin; j < end; ++j) {
      Rng rng(derive_seed(seed, SeedLane::VolumeEstimate, j));
      rng.fill_normal(x);
      local[envelope.best(x, heights).first] += 1;
    }
    partial[chunk] = std::move(local);
  });

  std::vector<std::size_t> counts(cells, 0);
  for (const auto& local : partial) {
    for (std::size_t i = 0; i < cells; ++i) counts[i] += local[i];
  }
  return counts;
}

namespace {

std::vector<double> normalize_counts(const std::vector<std::size_t>& counts, std::size_t n) {
  const std::size_t cells = counts.size();
  std::vector<double> w(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    w[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  // Pin the exact unit sum on the last cell; the adjustment is a few ulps.
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < cells; ++i) partial += w[i];
  w[cells - 1] = 1.0 - partial;
  return w;
}

}  // namespace

std::vector<double> estimate_cell_volumes(const BrenierPotential& p, std::size_t n,
                                          std::uint64_t seed, unsigned threads) {
  return normalize_counts(count_cells(p.envelope(), p.heights(), n, seed, threads), n);
}

double path_energy(std::span<const double> measure, std::span<const EnergyCheckpoint> path) {
  if (path.empty()) throw InputError("path_energy: empty path");
  const std::size_t cells = measure.size();
  for (const EnergyCheckpoint& c : path) {
    if (c.heights.size() != cells || c.volumes.size() != cells) {
      throw InputError("path_energy: checkpoint size mismatch");
    }
  }
  for (double h : path.front().heights) {
    if (h != 0.0) throw InputError("path_energy: path must start at h = 0");
  }

  double integral = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const EnergyCheckpoint& a = path[k - 1];
    const EnergyCheckpoint& b = path[k];
    for (std::size_t i = 0; i < cells; ++i) {
      integral += 0.5 * (a.volumes[i] + b.volumes[i]) * (b.heights[i] - a.heights[i]);
    }
  }
  double linear = 0.0;
  for (std::size_t i = 0; i < cells; ++i) linear += path.back().heights[i] * measure[i];
  return integral - linear;
}

std::vector<double> centered_gradient(std::span<const double> volumes,
                                      std::span<const double> measure) {
  if (volumes.size() != measure.size()) throw InputError("centered_gradient: length mismatch");
  std::vector<double> g(volumes.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = volumes[i] - measure[i];
    sum += g[i];
  }
  const double shift = sum / static_cast<double>(g.size());
  for (double& v : g) v -= shift;
  return g;
}

FitResult fit(const TargetSet& targets, const SolverConfig& config) {
  config.validate();
  const std::size_t cells = targets.size();
  const std::span<const double> nu(targets.measure());
  const UpperEnvelope envelope(targets.dim(), targets.points());

  std::size_t n = config.n_samples != 0 ? config.n_samples : 10 * cells;
  n = std::min(n, config.n_samples_cap);
  double lr = config.lr;

  std::vector<double> h(cells, 0.0);
  std::vector<double> adam_m(cells, 0.0);
  std::vector<double> adam_v(cells, 0.0);

  SolverTrace trace;
  trace.records.reserve(std::min<std::size_t>(config.max_iters, 4096));

  std::vector<double> best_h = h;
  double best_stat = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;

  // Energy accumulates along the solver's own height trajectory.
  double energy_integral = 0.0;
  std::vector<double> prev_h = h;
  std::vector<double> prev_w;

  bool converged = false;
  double achieved = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    const std::uint64_t iter_seed = derive_seed(config.seed, SeedLane::VolumeEstimate, iter);
    const std::vector<std::size_t> counts = count_cells(envelope, h, n, iter_seed, config.threads);
    const std::vector<double> w = normalize_counts(counts, n);

    if (!prev_w.empty()) {
      for (std::size_t i = 0; i < cells; ++i) {
        energy_integral += 0.5 * (prev_w[i] + w[i]) * (h[i] - prev_h[i]);
      }
    }
    double linear = 0.0;
    for (std::size_t i = 0; i < cells; ++i) linear += h[i] * nu[i];
    const double energy = energy_integral - linear;

    double stat = 0.0;
    for (std::size_t i = 0; i < cells; ++i) stat = std::max(stat, std::abs(w[i] - nu[i]));

    trace.records.push_back({iter, energy, stat, n, lr});
    trace.iterations = iter;

    if (!std::isfinite(energy) || !std::isfinite(stat)) {
      throw SolverDivergedError("fit: non-finite energy or deviation", std::move(trace));
    }

    if (stat < best_stat) {
      best_stat = stat;
      best_h = h;
      stall = 0;
    } else {
      ++stall;
    }

    if (stat < config.tol) {
      converged = true;
      achieved = stat;
      best_h = h;
      break;
    }

    if (stall >= config.stall_window) {
      n = std::min(n * 2, config.n_samples_cap);
      lr *= 0.8;
      stall = 0;
    }

    const std::vector<double> grad = centered_gradient(w, nu);
    const double k = static_cast<double>(iter);
    const double bc1 = 1.0 - std::pow(config.adam_beta1, k);
    const double bc2 = 1.0 - std::pow(config.adam_beta2, k);

    prev_h = h;
    prev_w = w;

    for (std::size_t i = 0; i < cells; ++i) {
      adam_m[i] = config.adam_beta1 * adam_m[i] + (1.0 - config.adam_beta1) * grad[i];
      adam_v[i] = config.adam_beta2 * adam_v[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
      const double m_hat = adam_m[i] / bc1;
      const double v_hat = adam_v[i] / bc2;
      h[i] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }

    // Gauge fix: heights are defined up to an additive constant.
    const double h_mean = mean(h);
    for (double& v : h) v -= h_mean;

    if (!all_finite(h)) {
      throw SolverDivergedError("fit: non-finite heights", std::move(trace));
    }
  }

  if (!converged) achieved = best_stat;
  trace.converged = converged;
  trace.achieved_tol = achieved;

  // Canonical gauge for the returned potential.
  const double gauge = mean(best_h);
  for (double& v : best_h) v -= gauge;

  return FitResult{BrenierPotential(targets, std::move(best_h)), std::move(trace)};
}

}  // namespace otdiff
