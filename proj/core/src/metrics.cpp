#include "otdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "otdiff/common.hpp"
#include "otdiff/parallel.hpp"
#include "otdiff/rng.hpp"

namespace otdiff {

bool mode_mixture_flag(std::span<const double> probs, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("mode_mixture_flag: lambda outside (0,1)");
  if (probs.empty()) throw InputError("mode_mixture_flag: empty probability vector");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InputError("mode_mixture_flag: invalid probability vector");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("mode_mixture_flag: probabilities must sum to 1");

  std::size_t reached = 0;
  for (double p : probs) {
    if (p >= lambda) ++reached;
  }
  return reached >= 2;
}

MmrReport mode_mixture_ratio(const SampleBatch& batch, const Classifier& clf, double lambda) {
  const std::size_t n = batch.size();
  if (n == 0) throw InputError("mode_mixture_ratio: empty batch");
  if (batch.dim != clf.dim()) throw InputError("mode_mixture_ratio: dimension mismatch");

  MmrReport report;
  report.count = n;
  report.lambda = lambda;
  report.flags.resize(n);

  std::vector<double> probs(clf.classes());
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < n; ++i) {
    clf.posterior(batch.row(i), probs);
    report.flags[i] = mode_mixture_flag(probs, lambda) ? 1 : 0;
    flagged += report.flags[i];
  }
  report.mmr = static_cast<double>(flagged) / static_cast<double>(n);
  return report;
}

nlohmann::json MmrReport::to_json() const {
  nlohmann::json j;
  j["count"] = count;
  j["lambda"] = lambda;
  j["mmr"] = mmr;
  j["flagged"] = static_cast<std::size_t>(std::accumulate(flags.begin(), flags.end(), std::size_t{0}));
  j["flags"] = flags;
  return j;
}

MmrReport MmrReport::from_json(const nlohmann::json& j) {
  MmrReport r;
  r.count = j.at("count").get<std::size_t>();
  r.lambda = j.at("lambda").get<double>();
  r.mmr = j.at("mmr").get<double>();
  r.flags = j.at("flags").get<std::vector<std::uint8_t>>();
  return r;
}

namespace {

// Sum of pairwise Euclidean distances between rows of a and rows of b, with a
// fixed chunking of the outer loop so the reduction order is independent of
// the worker count.
double pairwise_distance_sum(const double* a, std::size_t na, const double* b, std::size_t nb,
                             std::size_t dim, unsigned threads) {
  constexpr std::size_t kChunk = 128;
  const std::size_t n_chunks = chunk_count(na, kChunk);
  std::vector<double> partial(n_chunks, 0.0);
  parallel_for_chunks(na, kChunk, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double* xi = a + i * dim;
      if (dim == 2) {
        const double x0 = xi[0], x1 = xi[1];
        for (std::size_t j = 0; j < nb; ++j) {
          const double d0 = x0 - b[j * 2];
          const double d1 = x1 - b[j * 2 + 1];
          acc += std::sqrt(d0 * d0 + d1 * d1);
        }
      } else {
        for (std::size_t j = 0; j < nb; ++j) {
          double q = 0.0;
          for (std::size_t k = 0; k < dim; ++k) {
            const double d = xi[k] - b[j * dim + k];
            q += d * d;
          }
          acc += std::sqrt(q);
        }
      }
    }
    partial[chunk] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

double energy_distance_raw(const double* a, std::size_t na, const double* b, std::size_t nb,
                           std::size_t dim, unsigned threads) {
  const double cross = pairwise_distance_sum(a, na, b, nb, dim, threads) /
                       (static_cast<double>(na) * static_cast<double>(nb));
  const double within_a = pairwise_distance_sum(a, na, a, na, dim, threads) /
                          (static_cast<double>(na) * static_cast<double>(na));
  const double within_b = pairwise_distance_sum(b, nb, b, nb, dim, threads) /
                          (static_cast<double>(nb) * static_cast<double>(nb));
  return 2.0 * cross - within_a - within_b;
}

}  // namespace

double energy_distance(const SampleBatch& a, const SampleBatch& b, unsigned threads) {
  if (a.size() == 0 || b.size() == 0) throw InputError("energy_distance: empty batch");
  if (a.dim != b.dim) throw InputError("energy_distance: dimension mismatch");
  return energy_distance_raw(a.data.data(), a.size(), b.data.data(), b.size(), a.dim, threads);
}

double permutation_null_quantile(const SampleBatch& a, const SampleBatch& b, double q,
                                 std::size_t n_permutations, std::uint64_t seed,
                                 unsigned threads) {
  if (!(q > 0.0 && q < 1.0)) throw InputError("permutation_null_quantile: q outside (0,1)");
  if (n_permutations == 0) throw InputError("permutation_null_quantile: need permutations");
  if (a.dim != b.dim) throw InputError("permutation_null_quantile: dimension mismatch");

  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t dim = a.dim;
  std::vector<double> pooled;
  pooled.reserve((na + nb) * dim);
  pooled.insert(pooled.end(), a.data.begin(), a.data.end());
  pooled.insert(pooled.end(), b.data.begin(), b.data.end());

  std::vector<double> stats(n_permutations);
  std::vector<std::size_t> index(na + nb);
  std::vector<double> shuffled(pooled.size());
  for (std::size_t p = 0; p < n_permutations; ++p) {
    std::iota(index.begin(), index.end(), 0);
    Rng rng(derive_seed(seed, SeedLane::Permutation, p));
    // Fisher-Yates
    for (std::size_t i = index.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
      std::swap(index[i - 1], index[std::min(j, i - 1)]);
    }
    for (std::size_t i = 0; i < index.size(); ++i) {
      const double* src = pooled.data() + index[i] * dim;
      std::copy(src, src + dim, shuffled.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    stats[p] = energy_distance_raw(shuffled.data(), na, shuffled.data() + na * dim, nb, dim,
                                   threads);
  }

  std::sort(stats.begin(), stats.end());
  const std::size_t rank = std::min(
      n_permutations - 1,
      static_cast<std::size_t>(std::ceil(q * static_cast<double>(n_permutations))) - 1);
  return stats[rank];
}

std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
  if (n == 0 || cost.size() != n * n) throw InputError("solve_assignment: bad cost matrix");
  // Kuhn-Munkres with potentials; 1-based helper arrays.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // match[j] = row assigned to column j
  std::vector<std::size_t> way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double assignment_w2(const SampleBatch& a, const SampleBatch& b) {
  const std::size_t n = a.size();
  if (n == 0 || n != b.size()) throw InputError("assignment_w2: batches must have equal size");
  if (n > 512) throw InputError("assignment_w2: batch too large for exact assignment");
  if (a.dim != b.dim) throw InputError("assignment_w2: dimension mismatch");

  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = squared_distance(a.row(i), b.row(j));
    }
  }
  const std::vector<std::size_t> assignment = solve_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + assignment[i]];
  return std::sqrt(total / static_cast<double>(n));
}

}  // namespace otdiff
