#pragma once

#include <cstddef>
#include <vector>

#include "otdiff/brenier.hpp"
#include "otdiff/target_set.hpp"

namespace otdiff {

/// Exact heights for a 1D standard-normal source: cell boundaries are the
/// Gaussian quantiles of cumulative measure, and consecutive heights satisfy
/// the boundary condition b*y_i + h_i = b*y_{i+1} + h_{i+1}. Gauge-fixed to
/// mean zero. Requires strictly increasing targets with positive weights, so
/// every cell has interior.
std::vector<double> solve_1d_exact(const TargetSet& targets);

/// Quadrature check of measure preservation in 2D: integrates the standard
/// normal over each cell on a regular grid of the given per-axis resolution
/// covering [-extent, extent]^2 and returns max_i |vol_i - nu_i|. Cell masses
/// use exact per-axis Gaussian rectangle masses assigned by rectangle center.
double grid_validate_2d(const BrenierPotential& p, std::size_t resolution, double extent = 6.0,
                        unsigned threads = 0);

}  // namespace otdiff
