#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "otdiff/common.hpp"
#include "otdiff/diffusion.hpp"
#include "otdiff/gmm.hpp"
#include "otdiff/rng.hpp"
#include "otdiff/schedule.hpp"
#include "otdiff/score_provider.hpp"
#include "test_helpers.hpp"

using namespace otdiff;
using namespace otdiff::testing;

namespace {

GaussianMixture two_modes_1d() {
  return GaussianMixture({GmmComponent{0.6, {-2.0}, 1.0}, GmmComponent{0.4, {2.0}, 0.7}});
}

}  // namespace

TEST_SUITE("score") {

TEST_CASE("mixture validation") {
  CHECK_THROWS_AS(GaussianMixture({}), InputError);
  CHECK_THROWS_AS(GaussianMixture({GmmComponent{0.5, {0.0}, 1.0}}), InputError);  // weights
  CHECK_THROWS_AS(GaussianMixture({GmmComponent{1.0, {0.0}, 0.0}}), InputError);  // stddev
  CHECK_THROWS_AS(GaussianMixture({GmmComponent{0.5, {0.0}, 1.0}, GmmComponent{0.5, {1.0, 2.0}, 1.0}}),
                  InputError);  // ragged means
}

TEST_CASE("score of a standard normal is -x") {
  const GaussianMixture gm({GmmComponent{1.0, {0.0}, 1.0}});
  for (double x : {-3.0, -0.5, 0.0, 1.25, 8.0}) {
    const std::vector<double> s = gmm_score(gm, std::vector<double>{x}, 0.0);
    CHECK(s[0] == -x);
  }
}

TEST_CASE("score vanishes at the mean of a single component") {
  const GaussianMixture gm({GmmComponent{1.0, {2.0, 0.0}, 1.0}});
  const std::vector<double> s = gmm_score(gm, std::vector<double>{2.0, 0.0}, 3.0);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.0);
}

TEST_CASE("two-component score matches finite differences of the log-density") {
  const GaussianMixture gm = two_modes_1d();
  Rng rng(55);
  for (double v : {0.0, 0.5, 4.0}) {
    for (int i = 0; i < 100; ++i) {
      const std::vector<double> x = {(2.0 * rng.uniform01() - 1.0) * 6.0};
      const std::vector<double> s = gmm_score(gm, x, v);
      const std::vector<double> fd = fd_gradient(
          [&](std::span<const double> p) { return gm.log_density(p, v); }, x);
      CHECK(score_rel_error(s, fd) <= 1e-5);
    }
  }
}

TEST_CASE("non-finite input is rejected") {
  const GaussianMixture gm = two_modes_1d();
  std::vector<double> out(1);
  CHECK_THROWS_AS(gm.score(std::vector<double>{std::nan("")}, 0.0, out), InputError);
  CHECK_THROWS_AS(gm.score(std::vector<double>{1e308 * 10}, 0.0, out), InputError);
}

TEST_CASE("responsibilities are a probability vector") {
  const GaussianMixture gm({GmmComponent{0.3, {-4.0}, 0.5}, GmmComponent{0.5, {0.0}, 1.0},
                            GmmComponent{0.2, {4.0}, 2.0}});
  Rng rng(66);
  std::vector<double> r(3);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x = {rng.normal() * 20.0};
    gm.responsibilities(x, rng.uniform01(), r);
    double sum = 0.0;
    for (double v : r) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("noise variance at step zero is zero") {
  const DiffusionSchedule ve = DiffusionSchedule::variance_exploding(10);
  const DiffusionSchedule vp = DiffusionSchedule::variance_preserving(10);
  CHECK(noise_var_at(ve, 0) == 0.0);
  CHECK(noise_var_at(vp, 0) == 0.0);
  CHECK(mean_scale_at(ve, 0) == 1.0);
  CHECK(mean_scale_at(vp, 0) == 1.0);
  CHECK_THROWS_AS(noise_var_at(ve, 11), InputError);
}

TEST_CASE("constant-sigma schedule accumulates t * c^2") {
  const double c = 0.3;
  const DiffusionSchedule sched = DiffusionSchedule::custom_sigmas(std::vector<double>(8, c));
  for (std::size_t t = 0; t <= 8; ++t) {
    CHECK(noise_var_at(sched, t) ==
          doctest::Approx(static_cast<double>(t) * c * c).epsilon(1e-14));
  }
}

TEST_CASE("mean-contracting marginals match simulation") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_preserving(40, 0.005, 0.08);
  const std::size_t m = 25;
  const std::size_t n = 100000;
  const double x0 = 2.0;

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> xm =
        diffuse_to(std::vector<double>{x0}, m, sched, derive_seed(4242, 3, i));
    sum += xm[0];
    sum2 += xm[0] * xm[0];
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(mean == doctest::Approx(mean_scale_at(sched, m) * x0).epsilon(0.01));
  CHECK(var == doctest::Approx(noise_var_at(sched, m)).epsilon(0.03));
}

TEST_CASE("oracle provider passes the finite-difference check on both schedules") {
  const GaussianMixture gm = four_modes();
  const std::vector<std::size_t> steps = {0, 1, 5, 10, 40, 100};
  for (const DiffusionSchedule& sched : {DiffusionSchedule::variance_exploding(100),
                                         DiffusionSchedule::variance_preserving(100)}) {
    const GmmScoreOracle oracle(gm, sched);
    const double err = provider_fd_error(
        oracle,
        [&](std::span<const double> x, std::size_t t) {
          return oracle.marginal_mixture(t).log_density(x, oracle.marginal_noise_var(t));
        },
        steps, 5.0, 100, 777);
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("degeneracy: huge noise washes a centered mixture out to -x/v") {
  // Mixture mean is zero so the limit picks up no offset.
  const GaussianMixture gm({GmmComponent{0.5, {-1.5, 0.5}, 0.8},
                            GmmComponent{0.5, {1.5, -0.5}, 0.8}});
  const std::vector<double> x = {0.7, -1.1};
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double v : {1e2, 1e4, 1e6}) {
    const std::vector<double> s = gmm_score(gm, x, v);
    std::vector<double> diff(2);
    for (std::size_t k = 0; k < 2; ++k) diff[k] = s[k] + x[k] / v;
    const double gap = v * norm(diff);  // o(1/v) means v * gap -> 0
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-4);
}

TEST_CASE("tabulated score: round trip and exact interpolation of a linear field") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(10, 0.1, 1.0);
  const GmmScoreOracle oracle(GaussianMixture({GmmComponent{1.0, {0.0, 0.0}, 1.0}}), sched);

  const std::vector<TabulatedScore::Axis> axes = {{-6.0, 6.0, 25}, {-6.0, 6.0, 25}};
  const TabulatedScore table = TabulatedScore::tabulate(oracle, axes, {0, 5, 10});

  const auto path = std::filesystem::temp_directory_path() / "otdiff_test_grid.sgrd";
  table.save(path);
  const TabulatedScore loaded = TabulatedScore::load(path);
  std::filesystem::remove(path);

  Rng rng(88);
  std::vector<double> x(2), got(2), want(2);
  for (int i = 0; i < 100; ++i) {
    x[0] = (2.0 * rng.uniform01() - 1.0) * 5.5;
    x[1] = (2.0 * rng.uniform01() - 1.0) * 5.5;
    for (std::size_t t : {std::size_t{0}, std::size_t{5}, std::size_t{10}}) {
      loaded.score(x, t, got);
      oracle.score(x, t, want);
      // The Gaussian score is linear, so multilinear interpolation is exact
      // up to rounding.
      CHECK(std::abs(got[0] - want[0]) <= 1e-12);
      CHECK(std::abs(got[1] - want[1]) <= 1e-12);
    }
  }

  CHECK_THROWS_AS(loaded.score(x, 3, got), InputError);  // no slice for t=3
  CHECK_THROWS_AS(loaded.score(std::vector<double>{0.0}, 5, got), InputError);
}

TEST_CASE("tabulated mixture score passes the finite-difference check") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(20, 0.1, 1.0);
  const GaussianMixture gm = two_modes_1d();
  const GmmScoreOracle oracle(gm, sched);
  const TabulatedScore table =
      TabulatedScore::tabulate(oracle, {{-8.0, 8.0, 4097}}, {0, 10});

  const std::vector<std::size_t> steps = {0, 10};
  const double err = provider_fd_error(
      table,
      [&](std::span<const double> x, std::size_t t) {
        return oracle.marginal_mixture(t).log_density(x, oracle.marginal_noise_var(t));
      },
      steps, 6.0, 100, 999);
  CHECK(err <= 1e-4);
}

}  // TEST_SUITE
