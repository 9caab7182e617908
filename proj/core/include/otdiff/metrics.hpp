#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "otdiff/gmm.hpp"
#include "otdiff/sampler.hpp"

namespace otdiff {

/// Maps a point to a probability vector over C classes.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t classes() const = 0;
  virtual void posterior(std::span<const double> x, std::span<double> out) const = 0;
};

/// Bayes-optimal classifier for mixture data: class probabilities are the
/// component responsibilities at zero noise.
class BayesGmmClassifier final : public Classifier {
 public:
  explicit BayesGmmClassifier(GaussianMixture gm) : gm_(std::move(gm)) {}
  std::size_t dim() const override { return gm_.dim(); }
  std::size_t classes() const override { return gm_.size(); }
  void posterior(std::span<const double> x, std::span<double> out) const override {
    gm_.responsibilities(x, 0.0, out);
  }

 private:
  GaussianMixture gm_;
};

/// 1 iff at least two class probabilities reach lambda (inclusive).
bool mode_mixture_flag(std::span<const double> probs, double lambda);

struct MmrReport {
  std::size_t count = 0;
  double lambda = 0.0;
  std::vector<std::uint8_t> flags;
  double mmr = 0.0;

  nlohmann::json to_json() const;
  static MmrReport from_json(const nlohmann::json& j);
};

MmrReport mode_mixture_ratio(const SampleBatch& batch, const Classifier& clf, double lambda);

/// Energy distance 2 E||A-B|| - E||A-A'|| - E||B-B'|| using full pairwise
/// V-statistics, so identical batches give exactly zero.
double energy_distance(const SampleBatch& a, const SampleBatch& b, unsigned threads = 0);

/// q-quantile of the permutation null for the two-sample energy distance.
double permutation_null_quantile(const SampleBatch& a, const SampleBatch& b, double q,
                                 std::size_t n_permutations, std::uint64_t seed,
                                 unsigned threads = 0);

/// Minimum-cost perfect matching on an n x n cost matrix (row-major),
/// O(n^3); returns the column assigned to each row.
std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n);

/// Exact small-batch 2-Wasserstein distance: sqrt of the mean squared pair
/// distance under the optimal assignment. Batches must have equal size
/// n <= 512.
double assignment_w2(const SampleBatch& a, const SampleBatch& b);

}  // namespace otdiff
