#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "otdiff/brenier.hpp"
#include "otdiff/common.hpp"
#include "otdiff/target_set.hpp"

namespace otdiff {

struct SolverConfig {
  std::size_t n_samples = 0;    // initial Monte-Carlo count; 0 means 10 * |I|
  double lr = 0.1;
  std::size_t stall_window = 50;
  double tol = 8e-4;
  std::size_t max_iters = 10000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.5;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t n_samples_cap = std::size_t{1} << 20;  // bound on the doubling schedule
  unsigned threads = 0;

  void validate() const;
};

struct TraceRecord {
  std::size_t iteration;
  double energy;
  double max_dev;  // max_i |w_hat_i - nu_i|
  std::size_t n_samples;
  double lr;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  double achieved_tol = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t iterations = 0;

  void write_csv(std::ostream& out) const;
};

class SolverDivergedError : public NumericError {
 public:
  SolverDivergedError(const std::string& what, SolverTrace trace)
      : NumericError(what), trace(std::move(trace)) {}
  SolverTrace trace;
};

/// Fraction of n standard-normal draws landing in each cell. Deterministic
/// given the seed and independent of the worker count; the fractions sum to
/// 1.0 exactly.
std::vector<double> estimate_cell_volumes(const BrenierPotential& p, std::size_t n,
                                          std::uint64_t seed, unsigned threads = 0);

/// Raw per-cell hit counts for an envelope with explicit heights.
std::vector<std::size_t> count_cells(const UpperEnvelope& envelope, std::span<const double> heights,
                                     std::size_t n, std::uint64_t seed, unsigned threads = 0);

struct EnergyCheckpoint {
  std::vector<double> heights;
  std::vector<double> volumes;
};

/// Convex transport energy along a height trajectory: trapezoidal
/// accumulation of integral sum_i w_i(eta) d eta_i minus sum_i h_i nu_i at
/// the final heights. The path must start at h = 0; by convexity the value is
/// path independent in exact arithmetic.
double path_energy(std::span<const double> measure, std::span<const EnergyCheckpoint> path);

/// (w_hat - nu) minus its mean; sums to zero so updates stay in the
/// mean-zero height gauge.
std::vector<double> centered_gradient(std::span<const double> volumes,
                                      std::span<const double> measure);

struct FitResult {
  BrenierPotential potential;
  SolverTrace trace;
};

/// Fits heights so Monte-Carlo cell volumes match the target measure.
/// Adam on the centered gradient; fresh noise each iteration; when the best
/// deviation stalls for stall_window iterations the sample count doubles
/// (capped) and the learning rate decays by 0.8. Stops when
/// max_i |w_hat_i - nu_i| < tol, else returns the best heights seen.
FitResult fit(const TargetSet& targets, const SolverConfig& config);

}  // namespace otdiff
