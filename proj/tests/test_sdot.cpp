#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "otdiff/common.hpp"
#include "otdiff/gaussian.hpp"
#include "otdiff/ot_oracle.hpp"
#include "otdiff/rng.hpp"
#include "otdiff/sdot.hpp"
#include "test_helpers.hpp"

using namespace otdiff;
using namespace otdiff::testing;

namespace {

TargetSet skewed_pair() { return TargetSet(1, {-1.0, 1.0}, {0.75, 0.25}); }

TargetSet circle_targets(std::size_t count) {
  std::vector<double> points;
  for (std::size_t i = 0; i < count; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / count;
    points.push_back(std::cos(angle));
    points.push_back(std::sin(angle));
  }
  return TargetSet::uniform(2, std::move(points));
}

}  // namespace

TEST_SUITE("sdot") {

TEST_CASE("volume estimate: a single cell takes all the mass") {
  const BrenierPotential p(TargetSet(3, {0.5, -0.5, 2.0}, {1.0}), {0.0});
  for (std::size_t n : {std::size_t{1}, std::size_t{17}, std::size_t{1000}}) {
    const std::vector<double> w = estimate_cell_volumes(p, n, 7);
    CHECK(w == std::vector<double>{1.0});
  }
}

TEST_CASE("volume estimate: symmetric pair splits evenly") {
  const BrenierPotential p(TargetSet(2, {1.0, 0.0, -1.0, 0.0}, {0.5, 0.5}), {0.0, 0.0});
  const std::size_t n = 40000;
  const std::vector<double> w = estimate_cell_volumes(p, n, 11);
  CHECK(std::abs(w[0] - 0.5) <= 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(w[0] + w[1] == 1.0);
}

TEST_CASE("volume estimate matches the 1D Gaussian CDF oracle") {
  const std::vector<double> y = {-1.0, 1.0};
  for (double h1 : {0.0, 0.6, 1.4}) {
    const std::vector<double> h = {h1, -h1};
    const BrenierPotential p(TargetSet(1, y, {0.5, 0.5}), h);
    const double boundary = 0.5 * (h[0] - h[1]);
    const double expected = normal_cdf(boundary);
    const std::vector<double> oracle = exact_cell_masses_1d(y, h);
    CHECK(oracle[0] == doctest::Approx(expected).epsilon(1e-14));

    const std::size_t n = 100000;
    const std::vector<double> w = estimate_cell_volumes(p, n, 13);
    CHECK(std::abs(w[0] - expected) <= 3.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("volume estimate: errors and determinism") {
  const BrenierPotential p(TargetSet(1, {-1.0, 1.0}, {0.5, 0.5}), {0.0, 0.0});
  CHECK_THROWS_AS(estimate_cell_volumes(p, 0, 1), InputError);

  const std::vector<double> a = estimate_cell_volumes(p, 12345, 99, 1);
  const std::vector<double> b = estimate_cell_volumes(p, 12345, 99, 5);
  CHECK(a == b);  // independent of worker count
  const std::vector<double> c = estimate_cell_volumes(p, 12345, 100, 1);
  CHECK(a != c);
}

TEST_CASE("path energy: zero heights give zero energy") {
  const std::vector<double> nu = {0.6, 0.4};
  std::vector<EnergyCheckpoint> path;
  path.push_back({{0.0, 0.0}, {0.5, 0.5}});
  CHECK(path_energy(nu, path) == 0.0);
}

TEST_CASE("path energy: single cell is identically zero along any path") {
  const std::vector<double> nu = {1.0};
  std::vector<EnergyCheckpoint> path;
  path.push_back({{0.0}, {1.0}});
  path.push_back({{2.5}, {1.0}});
  CHECK(path_energy(nu, path) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("path energy input errors") {
  const std::vector<double> nu = {1.0};
  CHECK_THROWS_AS(path_energy(nu, {}), InputError);
  std::vector<EnergyCheckpoint> bad;
  bad.push_back({{0.5}, {1.0}});
  CHECK_THROWS_AS(path_energy(nu, bad), InputError);  // must start at h = 0
}

TEST_CASE("path energy is path independent against straight-line quadrature") {
  // Three 1D targets; exact cell masses from the envelope oracle.
  const std::vector<double> y = {-1.0, 0.0, 1.0};
  const std::vector<double> nu = {0.3, 0.45, 0.25};
  const TargetSet targets(1, y, nu);
  const std::vector<double> h_final = solve_1d_exact(targets);

  auto checkpoint = [&](const std::vector<double>& h) {
    return EnergyCheckpoint{h, exact_cell_masses_1d(y, h)};
  };

  // Wandering path: overshoots the final heights and comes back.
  std::vector<EnergyCheckpoint> wander;
  const std::size_t k_steps = 400;
  for (std::size_t k = 0; k <= k_steps; ++k) {
    const double s = static_cast<double>(k) / k_steps;
    const double wobble = s * (1.0 - s);
    std::vector<double> h(3);
    for (std::size_t i = 0; i < 3; ++i) {
      h[i] = h_final[i] * s + wobble * (i == 0 ? 0.8 : i == 1 ? -0.5 : -0.3);
    }
    if (k == 0) h.assign(3, 0.0);
    wander.push_back(checkpoint(h));
  }

  // Dense straight-line quadrature oracle.
  std::vector<EnergyCheckpoint> straight;
  const std::size_t k_dense = 20000;
  for (std::size_t k = 0; k <= k_dense; ++k) {
    const double s = static_cast<double>(k) / k_dense;
    std::vector<double> h(3);
    for (std::size_t i = 0; i < 3; ++i) h[i] = h_final[i] * s;
    straight.push_back(checkpoint(h));
  }

  CHECK(path_energy(nu, wander) == doctest::Approx(path_energy(nu, straight)).epsilon(1e-3));
}

TEST_CASE("gradient: stationary at matched volumes") {
  const std::vector<double> w = {0.25, 0.5, 0.25};
  const std::vector<double> g = centered_gradient(w, w);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("gradient: already centered input is returned as is") {
  const std::vector<double> g = centered_gradient(std::vector<double>{0.6, 0.4},
                                                  std::vector<double>{0.5, 0.5});
  CHECK(g[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("gradient: centering makes the components sum to zero") {
  const std::vector<double> g = centered_gradient(std::vector<double>{0.7, 0.2, 0.1},
                                                  std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3});
  double sum = 0.0;
  for (double v : g) sum += v;
  CHECK(std::abs(sum) <= 1e-12);
  CHECK_THROWS_AS(centered_gradient(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}),
                  InputError);
}

TEST_CASE("fit: singleton target set converges immediately") {
  SolverConfig cfg;
  cfg.seed = 1;
  const FitResult r = fit(TargetSet(2, {0.3, -0.7}, {1.0}), cfg);
  CHECK(r.potential.heights() == std::vector<double>{0.0});
  CHECK(r.trace.converged);
  CHECK(r.trace.records.size() == 1);
  CHECK(r.trace.achieved_tol == 0.0);
}

TEST_CASE("fit: skewed 1D pair recovers the quantile boundary within 2%") {
  SolverConfig cfg;
  cfg.n_samples = 32768;
  cfg.lr = 0.005;
  cfg.max_iters = 2000;
  cfg.seed = 2024;
  const FitResult r = fit(skewed_pair(), cfg);
  const double boundary = 0.5 * (r.potential.heights()[0] - r.potential.heights()[1]);
  const double expected = normal_quantile(0.75);
  CHECK(std::abs(boundary - expected) / expected <= 0.02);
  CHECK(r.trace.converged);

  // Heights keep the mean-zero gauge.
  CHECK(std::abs(mean(r.potential.heights())) <= 1e-9);
}

TEST_CASE("fit: eight targets on a circle get uniform cell volumes") {
  SolverConfig cfg;
  cfg.n_samples = 32768;
  cfg.lr = 0.005;
  cfg.tol = 1.5e-3;
  cfg.max_iters = 2000;
  cfg.seed = 77;
  const TargetSet targets = circle_targets(8);
  const FitResult r = fit(targets, cfg);
  CHECK(r.trace.converged);

  // Recount with fresh noise at one million samples.
  const std::vector<double> w = estimate_cell_volumes(r.potential, 1000000, 31415);
  for (double v : w) CHECK(std::abs(v - 0.125) <= 0.01);
}

TEST_CASE("fit: trace invariants and windowed trend") {
  SolverConfig cfg;
  cfg.n_samples = 16384;
  cfg.lr = 0.01;
  cfg.tol = 2e-3;
  cfg.max_iters = 2000;
  cfg.seed = 5150;
  const FitResult r = fit(skewed_pair(), cfg);

  const auto& recs = r.trace.records;
  REQUIRE(recs.size() >= 2);
  for (std::size_t i = 1; i < recs.size(); ++i) {
    CHECK(recs[i].iteration == recs[i - 1].iteration + 1);
    CHECK(recs[i].n_samples >= recs[i - 1].n_samples);
    CHECK(recs[i].lr <= recs[i - 1].lr);
  }

  // Smoothed stopping statistic is non-increasing across most windows.
  const std::size_t window = cfg.stall_window;
  std::vector<double> means;
  for (std::size_t start = 0; start + window <= recs.size(); start += window) {
    double m = 0.0;
    for (std::size_t i = start; i < start + window; ++i) m += recs[i].max_dev;
    means.push_back(m / static_cast<double>(window));
  }
  if (means.size() >= 2) {
    std::size_t non_increasing = 0;
    for (std::size_t i = 1; i < means.size(); ++i) {
      if (means[i] <= means[i - 1]) ++non_increasing;
    }
    CHECK(static_cast<double>(non_increasing) / static_cast<double>(means.size() - 1) >= 0.9);
  }
}

TEST_CASE("fit: bitwise deterministic for a fixed config") {
  SolverConfig cfg;
  cfg.n_samples = 512;
  cfg.max_iters = 60;
  cfg.tol = 1e-9;  // force the full iteration budget
  cfg.seed = 654;
  const TargetSet targets(1, {-1.0, 0.2, 1.3}, {0.3, 0.4, 0.3});

  const FitResult a = fit(targets, cfg);
  cfg.threads = 4;
  const FitResult b = fit(targets, cfg);

  CHECK(a.potential.heights() == b.potential.heights());
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    CHECK(a.trace.records[i].energy == b.trace.records[i].energy);
    CHECK(a.trace.records[i].max_dev == b.trace.records[i].max_dev);
  }
  CHECK_FALSE(a.trace.converged);
  CHECK(a.trace.achieved_tol > 0.0);
}

TEST_CASE("fit: divergence surfaces as a solver error carrying the trace") {
  SolverConfig cfg;
  cfg.n_samples = 256;
  cfg.lr = 1e300;
  cfg.seed = 9;
  try {
    fit(skewed_pair(), cfg);
    FAIL("expected divergence");
  } catch (const SolverDivergedError& e) {
    CHECK(!e.trace.records.empty());
  }
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SolverConfig{};
  cfg.adam_beta2 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = SolverConfig{};
  cfg.tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("trace csv export") {
  SolverTrace trace;
  trace.records.push_back({1, -0.5, 0.25, 100, 0.1});
  std::ostringstream out;
  trace.write_csv(out);
  CHECK(out.str() == "iteration,energy,max_dev,n_samples,lr\n1,-0.5,0.25,100,0.1\n");
}

}  // TEST_SUITE
