#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace otdiff {

/// Discrete target supports {y_i} with weights nu_i. Weights must be
/// nonnegative and sum to 1 within 1e-12; bitwise-duplicate points are
/// rejected because they would create indistinguishable cells.
class TargetSet {
 public:
  TargetSet(std::size_t dim, std::vector<double> points, std::vector<double> measure);

  /// Uniform measure 1/|I| over the given points.
  static TargetSet uniform(std::size_t dim, std::vector<double> points);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return measure_.size(); }

  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& measure() const { return measure_; }

 private:
  std::size_t dim_;
  std::vector<double> points_;   // row-major |I| x d
  std::vector<double> measure_;  // nu, length |I|
};

}  // namespace otdiff
