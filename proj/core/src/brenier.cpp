#include "otdiff/brenier.hpp"

#include <limits>

#include "otdiff/common.hpp"

namespace otdiff {

UpperEnvelope::UpperEnvelope(std::size_t dim, std::span<const double> row_major_points)
    : dim_(dim), count_(dim == 0 ? 0 : row_major_points.size() / dim) {
  if (dim_ == 0 || count_ == 0 || row_major_points.size() != dim_ * count_) {
    throw InputError("UpperEnvelope: bad point layout");
  }
  coords_.resize(dim_ * count_);
  for (std::size_t i = 0; i < count_; ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      coords_[k * count_ + i] = row_major_points[i * dim_ + k];
    }
  }
}

std::pair<std::size_t, double> UpperEnvelope::best(std::span<const double> x,
                                                   std::span<const double> heights) const {
  if (x.size() != dim_) throw InputError("envelope: query dimension mismatch");
  if (heights.size() != count_) throw InputError("envelope: heights length mismatch");

  double best_value = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;

  constexpr std::size_t kBlock = 128;
  double scores[kBlock];
  for (std::size_t base = 0; base < count_; base += kBlock) {
    const std::size_t n = std::min(kBlock, count_ - base);
    for (std::size_t j = 0; j < n; ++j) scores[j] = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double xk = x[k];
      const double* col = coords_.data() + k * count_ + base;
      for (std::size_t j = 0; j < n; ++j) scores[j] += xk * col[j];
    }
    const double* h = heights.data() + base;
    for (std::size_t j = 0; j < n; ++j) scores[j] += h[j];
    for (std::size_t j = 0; j < n; ++j) {
      if (scores[j] > best_value) {
        best_value = scores[j];
        best_index = base + j;
      }
    }
  }
  return {best_index, best_value};
}

BrenierPotential::BrenierPotential(TargetSet targets, std::vector<double> heights)
    : BrenierPotential(std::move(targets), std::move(heights), Provenance()) {}

BrenierPotential::BrenierPotential(TargetSet targets, std::vector<double> heights,
                                   Provenance provenance)
    : targets_(std::move(targets)),
      heights_(std::move(heights)),
      provenance_(provenance),
      envelope_(targets_.dim(), targets_.points()) {
  if (heights_.size() != targets_.size()) {
    throw InputError("BrenierPotential: heights length mismatch");
  }
  if (!all_finite(heights_)) throw InputError("BrenierPotential: non-finite height");
}

double BrenierPotential::value(std::span<const double> x) const {
  return envelope_.best(x, heights_).second;
}

std::size_t BrenierPotential::cell_index(std::span<const double> x) const {
  return envelope_.best(x, heights_).first;
}

std::span<const double> BrenierPotential::ot_map(std::span<const double> x) const {
  return targets_.point(cell_index(x));
}

}  // namespace otdiff
