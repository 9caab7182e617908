#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "otdiff/schedule.hpp"

namespace otdiff {

/// Reverse-update family: General subtracts the drift term, Langevin is the
/// zero-drift form x + sigma^2 * score + sigma * z. They coincide when the
/// schedule has no drift.
enum class ReverseVariant { General, Langevin };

/// Ordered (step, state) records with strictly monotone steps; used for CSV
/// export and for diagnostics attached to numeric failures.
class Trajectory {
 public:
  explicit Trajectory(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return steps_.size(); }
  std::int64_t step(std::size_t i) const { return steps_[i]; }
  std::span<const double> state(std::size_t i) const { return {states_.data() + i * dim_, dim_}; }

  void append(std::int64_t step, std::span<const double> state);
  void write_csv(std::ostream& out) const;

 private:
  std::size_t dim_;
  std::vector<std::int64_t> steps_;
  std::vector<double> states_;
};

/// One forward transition x_t -> x_{t+1} = x_t + b(x_t) + sigma * z using the
/// coefficients of transition t+1. Requires 0 <= t < T.
void forward_step(std::span<const double> x, std::size_t t, const DiffusionSchedule& sched,
                  std::span<const double> z, std::span<double> out);

/// Applies m forward steps from step 0 with fresh draws from the given seed.
std::vector<double> diffuse_to(std::span<const double> x0, std::size_t m,
                               const DiffusionSchedule& sched, std::uint64_t seed);

/// One reverse transition x_t -> x_{t-1}. Requires 1 <= t <= T. The caller
/// passes z = 0 for the final step t = 1.
void reverse_step(std::span<const double> x, std::size_t t, const DiffusionSchedule& sched,
                  std::span<const double> score, std::span<const double> z, std::span<double> out,
                  ReverseVariant variant = ReverseVariant::General);

}  // namespace otdiff
