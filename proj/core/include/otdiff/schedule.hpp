#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace otdiff {

enum class ScheduleKind { VarianceExploding, VariancePreserving };

/// Discrete noise schedule over T unit steps. Coefficient index t in [1, T]
/// governs the transition from step t-1 to step t; index 0 is a placeholder.
///
/// Variance-exploding: zero drift, sigma_t geometric from sigma_min to
/// sigma_max. Variance-preserving: beta_t linear from beta_min to beta_max,
/// drift b(x, t) = -beta_t/2 * x, sigma_t = sqrt(beta_t).
class DiffusionSchedule {
 public:
  static DiffusionSchedule variance_exploding(std::size_t steps, double sigma_min = 0.01,
                                              double sigma_max = 5.0);
  static DiffusionSchedule variance_preserving(std::size_t steps, double beta_min = 1e-4,
                                               double beta_max = 0.02);

  /// Zero-drift schedule with explicit sigmas (length T, for step 1..T).
  /// No monotonicity requirement; mostly useful for controlled experiments.
  static DiffusionSchedule custom_sigmas(std::vector<double> sigmas);

  /// Mean-contracting schedule with explicit betas (length T).
  static DiffusionSchedule custom_betas(std::vector<double> betas);

  ScheduleKind kind() const { return kind_; }
  std::size_t steps() const { return steps_; }  // T

  /// Diffusion coefficient for transition t, t in [1, T].
  double sigma(std::size_t t) const;

  /// Scalar a_t with drift b(x, t) = a_t * x; zero for variance-exploding.
  double drift_scale(std::size_t t) const;

  double beta(std::size_t t) const;

  /// Variance of the noise accumulated by steps 1..t (the conditional
  /// variance of x_t given x_0). t in [0, T].
  double marginal_variance(std::size_t t) const;

  /// Factor multiplying x_0 in the mean of x_t; 1 for variance-exploding.
  double mean_scale(std::size_t t) const;

  std::uint64_t digest() const;

 private:
  DiffusionSchedule(ScheduleKind kind, std::vector<double> sigma, std::vector<double> beta);
  void check_step(std::size_t t, bool allow_zero) const;

  ScheduleKind kind_;
  std::size_t steps_;
  std::vector<double> sigma_;         // [0..T], index 0 unused
  std::vector<double> beta_;          // [0..T] for VP, empty otherwise
  std::vector<double> mean_scale_;    // [0..T]
  std::vector<double> marginal_var_;  // [0..T]
};

}  // namespace otdiff
