#include "otdiff/target_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "otdiff/common.hpp"

namespace otdiff {

TargetSet::TargetSet(std::size_t dim, std::vector<double> points, std::vector<double> measure)
    : dim_(dim), points_(std::move(points)), measure_(std::move(measure)) {
  if (dim_ == 0) throw InputError("TargetSet: dimension must be >= 1");
  if (measure_.empty()) throw InputError("TargetSet: needs at least one target");
  if (points_.size() != measure_.size() * dim_) {
    throw InputError("TargetSet: points/measure size mismatch");
  }
  if (!all_finite(points_)) throw InputError("TargetSet: non-finite point");

  double total = 0.0;
  for (double w : measure_) {
    if (!(w >= 0.0)) throw InputError("TargetSet: negative or non-finite weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InputError("TargetSet: weights must sum to 1");

  // Bitwise duplicate detection via lexicographic sort of row bytes.
  const std::size_t n = measure_.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t row_bytes = dim_ * sizeof(double);
  auto row_ptr = [&](std::size_t i) { return points_.data() + i * dim_; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::memcmp(row_ptr(a), row_ptr(b), row_bytes) < 0;
  });
  for (std::size_t k = 1; k < n; ++k) {
    if (std::memcmp(row_ptr(order[k - 1]), row_ptr(order[k]), row_bytes) == 0) {
      throw InputError("TargetSet: duplicate target point");
    }
  }
}

TargetSet TargetSet::uniform(std::size_t dim, std::vector<double> points) {
  if (dim == 0) throw InputError("TargetSet: dimension must be >= 1");
  const std::size_t n = dim == 0 ? 0 : points.size() / dim;
  if (n == 0) throw InputError("TargetSet: needs at least one target");
  std::vector<double> measure(n, 1.0 / static_cast<double>(n));
  // Remove accumulated rounding so the sum-to-1 invariant holds exactly.
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) partial += measure[i];
  measure[n - 1] = 1.0 - partial;
  return TargetSet(dim, std::move(points), std::move(measure));
}

}  // namespace otdiff
