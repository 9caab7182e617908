#include "otdiff/ot_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "otdiff/common.hpp"
#include "otdiff/gaussian.hpp"
#include "otdiff/parallel.hpp"

namespace otdiff {

std::vector<double> solve_1d_exact(const TargetSet& targets) {
  if (targets.dim() != 1) throw InputError("solve_1d_exact: targets must be 1D");
  const std::size_t n = targets.size();
  const std::vector<double>& y = targets.points();
  const std::vector<double>& nu = targets.measure();
  for (std::size_t i = 1; i < n; ++i) {
    if (!(y[i] > y[i - 1])) throw InputError("solve_1d_exact: targets must be strictly increasing");
  }
  for (double w : nu) {
    if (!(w > 0.0)) throw InputError("solve_1d_exact: weights must be positive");
  }

  std::vector<double> h(n, 0.0);
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cumulative += nu[i];
    const double boundary = normal_quantile(std::min(cumulative, 1.0));
    h[i + 1] = h[i] + boundary * (y[i] - y[i + 1]);
  }

  const double gauge = mean(h);
  for (double& v : h) v -= gauge;
  return h;
}

double grid_validate_2d(const BrenierPotential& p, std::size_t resolution, double extent,
                        unsigned threads) {
  if (p.dim() != 2) throw InputError("grid_validate_2d: potential must be 2D");
  if (resolution < 100) throw InputError("grid_validate_2d: resolution below 100 per axis");
  if (!(extent > 0.0)) throw InputError("grid_validate_2d: extent must be positive");

  const std::size_t cells = p.size();
  const std::size_t res = resolution;
  const double step = 2.0 * extent / static_cast<double>(res);

  // Exact 1D Gaussian mass of each grid interval; shared by both axes.
  std::vector<double> edge_cdf(res + 1);
  for (std::size_t i = 0; i <= res; ++i) {
    edge_cdf[i] = normal_cdf(-extent + static_cast<double>(i) * step);
  }
  std::vector<double> interval_mass(res);
  for (std::size_t i = 0; i < res; ++i) interval_mass[i] = edge_cdf[i + 1] - edge_cdf[i];

  constexpr std::size_t kRowChunk = 16;
  const std::size_t n_chunks = chunk_count(res, kRowChunk);
  std::vector<std::vector<double>> partial(n_chunks);

  parallel_for_chunks(res, kRowChunk, threads,
                      [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<double> local(cells, 0.0);
    double x[2];
    for (std::size_t row = begin; row < end; ++row) {
      x[1] = -extent + (static_cast<double>(row) + 0.5) * step;
      const double row_mass = interval_mass[row];
      for (std::size_t col = 0; col < res; ++col) {
        x[0] = -extent + (static_cast<double>(col) + 0.5) * step;
        local[p.cell_index({x, 2})] += row_mass * interval_mass[col];
      }
    }
    partial[chunk] = std::move(local);
  });

  std::vector<double> volumes(cells, 0.0);
  for (const auto& local : partial) {
    for (std::size_t i = 0; i < cells; ++i) volumes[i] += local[i];
  }

  const std::vector<double>& nu = p.targets().measure();
  double max_dev = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    max_dev = std::max(max_dev, std::abs(volumes[i] - nu[i]));
  }
  return max_dev;
}

}  // namespace otdiff
