#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "otdiff/target_set.hpp"

namespace otdiff {

/// Evaluates the upper envelope max_i(<x, y_i> + h_i) over a fixed point set.
/// Points are held dimension-major so the argmax scan vectorizes; the dot
/// product accumulates in ascending coordinate order and h is added last,
/// matching dot(x, y) + h bitwise.
class UpperEnvelope {
 public:
  UpperEnvelope(std::size_t dim, std::span<const double> row_major_points);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return count_; }

  /// (argmax index, envelope value); ties resolved to the lowest index.
  std::pair<std::size_t, double> best(std::span<const double> x,
                                      std::span<const double> heights) const;

 private:
  std::size_t dim_;
  std::size_t count_;
  std::vector<double> coords_;  // coords_[k * count_ + i] = y_i[k]
};

/// Discrete Brenier potential u_h(x) = max_i(<x, y_i> + h_i). The induced
/// transport map sends every point of cell i to target y_i. Immutable, so
/// concurrent evaluation is safe; heights change only through the fitter.
class BrenierPotential {
 public:
  /// Links a fitted potential to the schedule and latent set it was built
  /// from. Zero fields mean "no claim" (hand-built potentials).
  struct Provenance {
    std::uint32_t m_steps = 0;
    std::uint64_t schedule_digest = 0;
    std::uint64_t config_digest = 0;
  };

  BrenierPotential(TargetSet targets, std::vector<double> heights);
  BrenierPotential(TargetSet targets, std::vector<double> heights, Provenance provenance);

  const TargetSet& targets() const { return targets_; }
  const std::vector<double>& heights() const { return heights_; }
  const Provenance& provenance() const { return provenance_; }
  std::size_t dim() const { return targets_.dim(); }
  std::size_t size() const { return targets_.size(); }

  /// Envelope value u_h(x); convex and piecewise linear in x.
  double value(std::span<const double> x) const;

  /// argmax_i(<x, y_i> + h_i), lowest index on ties.
  std::size_t cell_index(std::span<const double> x) const;

  /// The transport map g(x) = y_{cell_index(x)}; piecewise constant.
  std::span<const double> ot_map(std::span<const double> x) const;

  const UpperEnvelope& envelope() const { return envelope_; }

 private:
  TargetSet targets_;
  std::vector<double> heights_;
  Provenance provenance_;
  UpperEnvelope envelope_;
};

}  // namespace otdiff
