#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "otdiff/gmm.hpp"
#include "otdiff/schedule.hpp"

namespace otdiff {

/// Variance of the noise injected by steps 1..t; what the score oracle needs
/// to see the correct marginal at step t.
double noise_var_at(const DiffusionSchedule& sched, std::size_t t);

/// Factor multiplying x_0 in the step-t marginal mean (1 for zero drift).
double mean_scale_at(const DiffusionSchedule& sched, std::size_t t);

/// Evaluator of grad log q_t(x). Implementations must return finite output
/// for finite input; all are stateless after construction.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t max_step() const = 0;
  virtual void score(std::span<const double> x, std::size_t t, std::span<double> out) const = 0;
};

/// Exact score for Gaussian-mixture data under the given schedule. The step-t
/// marginal of component k is N(m_t mu_k, m_t^2 s_k^2 + v_t), so the score is
/// the closed-form mixture score of the scaled mixture widened by v_t.
class GmmScoreOracle final : public ScoreProvider {
 public:
  GmmScoreOracle(GaussianMixture data, const DiffusionSchedule& sched);

  std::size_t dim() const override { return data_.dim(); }
  std::size_t max_step() const override { return noise_var_.size() - 1; }
  void score(std::span<const double> x, std::size_t t, std::span<double> out) const override;

  /// The exact step-t marginal as a mixture (used by tests and tabulation).
  const GaussianMixture& marginal_mixture(std::size_t t) const;
  double marginal_noise_var(std::size_t t) const;

 private:
  GaussianMixture data_;
  std::vector<GaussianMixture> scaled_;  // per t
  std::vector<double> noise_var_;        // per t
};

/// score == 0 everywhere; handy for isolating the noise dynamics.
class ZeroScore final : public ScoreProvider {
 public:
  ZeroScore(std::size_t dim, std::size_t max_step) : dim_(dim), max_step_(max_step) {}
  std::size_t dim() const override { return dim_; }
  std::size_t max_step() const override { return max_step_; }
  void score(std::span<const double>, std::size_t, std::span<double> out) const override {
    for (double& v : out) v = 0.0;
  }

 private:
  std::size_t dim_;
  std::size_t max_step_;
};

/// File-backed score on a regular grid with multilinear interpolation, one
/// grid slice per supported step. Queries outside the grid clamp to the
/// boundary; steps without a slice are rejected.
class TabulatedScore final : public ScoreProvider {
 public:
  struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t nodes = 2;
  };

  TabulatedScore(std::vector<Axis> axes, std::vector<std::uint32_t> step_values,
                 std::vector<double> values);

  /// Samples src on the grid at the given steps.
  static TabulatedScore tabulate(const ScoreProvider& src, std::vector<Axis> axes,
                                 std::vector<std::uint32_t> step_values);

  static TabulatedScore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t dim() const override { return axes_.size(); }
  std::size_t max_step() const override;
  void score(std::span<const double> x, std::size_t t, std::span<double> out) const override;

  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<std::uint32_t>& step_values() const { return step_values_; }

 private:
  std::size_t node_count() const;
  void interpolate(std::span<const double> x, const double* slice, std::span<double> out) const;

  std::vector<Axis> axes_;
  std::vector<std::uint32_t> step_values_;
  std::vector<double> values_;  // [slice][node][component]
};

}  // namespace otdiff
