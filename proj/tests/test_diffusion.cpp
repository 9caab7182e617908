#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "otdiff/common.hpp"
#include "otdiff/diffusion.hpp"
#include "otdiff/gmm.hpp"
#include "otdiff/rng.hpp"
#include "otdiff/score_provider.hpp"

using namespace otdiff;

namespace {

GaussianMixture single_gaussian(double stddev, std::size_t dim = 1) {
  return GaussianMixture({GmmComponent{1.0, std::vector<double>(dim, 0.0), stddev}});
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("schedule constructors enforce their invariants") {
  CHECK_THROWS_AS(DiffusionSchedule::variance_exploding(1), InputError);
  CHECK_THROWS_AS(DiffusionSchedule::variance_exploding(10, 0.5, 0.1), InputError);
  CHECK_THROWS_AS(DiffusionSchedule::variance_preserving(10, 0.2, 0.1), InputError);
  CHECK_THROWS_AS(DiffusionSchedule::custom_sigmas({1.0, 0.0, 1.0}), InputError);

  const DiffusionSchedule ve = DiffusionSchedule::variance_exploding(100);
  CHECK(ve.sigma(1) == doctest::Approx(0.01));
  CHECK(ve.sigma(100) == doctest::Approx(5.0));
  for (std::size_t t = 2; t <= 100; ++t) CHECK(ve.sigma(t) > ve.sigma(t - 1));

  const DiffusionSchedule vp = DiffusionSchedule::variance_preserving(100);
  CHECK(vp.beta(1) == doctest::Approx(1e-4));
  CHECK(vp.beta(100) == doctest::Approx(0.02));
  for (std::size_t t = 2; t <= 100; ++t) {
    CHECK(vp.beta(t) > vp.beta(t - 1));
    CHECK(vp.sigma(t) > 0.0);
  }
}

TEST_CASE("forward step: zero drift and zero noise leave the state alone") {
  const DiffusionSchedule sched = DiffusionSchedule::custom_sigmas({1.0, 1.0, 1.0});
  const std::vector<double> x = {0.7, -1.2};
  const std::vector<double> z = {0.0, 0.0};
  std::vector<double> out(2);
  forward_step(x, 0, sched, z, out);
  CHECK(out[0] == x[0]);
  CHECK(out[1] == x[1]);
}

TEST_CASE("forward step: mean-contracting drift applied once") {
  const DiffusionSchedule sched = DiffusionSchedule::custom_betas({0.02, 0.02});
  const std::vector<double> x = {1.0, 0.0};
  const std::vector<double> z = {0.0, 0.0};
  std::vector<double> out(2);
  forward_step(x, 0, sched, z, out);
  CHECK(out[0] == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(out[1] == 0.0);
}

TEST_CASE("step index range checks") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(10);
  std::vector<double> x = {0.0};
  std::vector<double> z = {0.0};
  std::vector<double> out(1);
  CHECK_THROWS_AS(forward_step(x, 10, sched, z, out), InputError);
  CHECK_THROWS_AS(reverse_step(x, 0, sched, z, z, out), InputError);
  CHECK_THROWS_AS(reverse_step(x, 11, sched, z, z, out), InputError);
  CHECK_THROWS_AS(diffuse_to(x, 0, sched, 1), InputError);
  CHECK_THROWS_AS(diffuse_to(x, 11, sched, 1), InputError);
}

TEST_CASE("forward marginal: accumulated noise variance matches the schedule") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(20, 0.1, 1.0);
  const std::size_t m = 12;
  const std::size_t n = 100000;
  const std::vector<double> x0 = {0.0};

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> xm = diffuse_to(x0, m, sched, derive_seed(77, 1, i));
    sum += xm[0];
    sum2 += xm[0] * xm[0];
  }
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(var == doctest::Approx(sched.marginal_variance(m)).epsilon(0.03));
}

TEST_CASE("diffuse_to: deterministic given the seed") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(50);
  const std::vector<double> x0 = {1.0, -2.0, 0.5};
  const std::vector<double> a = diffuse_to(x0, 30, sched, 12345);
  const std::vector<double> b = diffuse_to(x0, 30, sched, 12345);
  CHECK(a == b);
  const std::vector<double> c = diffuse_to(x0, 30, sched, 12346);
  CHECK(a != c);
}

TEST_CASE("diffused Gaussian data matches the closed-form convolution") {
  const double s = 0.5;
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(20, 0.1, 1.0);
  const GaussianMixture gm = single_gaussian(s);
  const std::size_t m = 10;
  const std::size_t n = 100000;
  const std::vector<double> data = gm.sample(n, 9001);

  double sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> xm =
        diffuse_to({&data[i], 1}, m, sched, derive_seed(9002, 2, i));
    sum2 += xm[0] * xm[0];
  }
  const double expected = s * s + sched.marginal_variance(m);
  CHECK(sum2 / n == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("reverse step: zero score, zero noise, zero drift is the identity") {
  const DiffusionSchedule sched = DiffusionSchedule::custom_sigmas({0.5, 0.5, 0.5});
  const std::vector<double> x = {2.0, -3.0};
  const std::vector<double> zero = {0.0, 0.0};
  std::vector<double> out(2);
  reverse_step(x, 2, sched, zero, zero, out);
  CHECK(out[0] == x[0]);
  CHECK(out[1] == x[1]);
}

TEST_CASE("reverse step with the exact Gaussian score contracts large states") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(20, 0.1, 1.0);
  const GmmScoreOracle oracle(single_gaussian(1.0), sched);
  std::vector<double> x = {8.0};
  std::vector<double> s(1);
  const std::vector<double> zero = {0.0};
  std::vector<double> out(1);
  for (std::size_t t = 20; t >= 1; --t) {
    oracle.score(x, t, s);
    // Exact score of the step-t marginal N(0, 1 + v_t).
    CHECK(s[0] == doctest::Approx(-x[0] / (1.0 + sched.marginal_variance(t))).epsilon(1e-12));
    reverse_step(x, t, sched, s, zero, out);
    CHECK(std::abs(out[0]) < std::abs(x[0]));
    x = out;
  }
}

TEST_CASE("langevin and general forms agree bitwise when the drift vanishes") {
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(10, 0.05, 2.0);
  Rng rng(31);
  std::vector<double> x(3), score(3), z(3), a(3), b(3);
  for (std::size_t t = 1; t <= 10; ++t) {
    rng.fill_normal(x);
    rng.fill_normal(score);
    rng.fill_normal(z);
    reverse_step(x, t, sched, score, z, a, ReverseVariant::General);
    reverse_step(x, t, sched, score, z, b, ReverseVariant::Langevin);
    CHECK(a == b);
  }
}

TEST_CASE("property: noise-free reverse runs decrease the data-space energy") {
  const double s = 0.7;
  const DiffusionSchedule sched = DiffusionSchedule::variance_exploding(30, 0.1, 2.0);
  const GaussianMixture gm = single_gaussian(s);
  const GmmScoreOracle oracle(gm, sched);

  const std::size_t trials = 200;
  std::size_t monotone = 0;
  Rng rng(41);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::vector<double> x = {rng.normal() * std::sqrt(s * s + sched.marginal_variance(30))};
    bool ok = true;
    double prev_nll = -gm.log_density(x, 0.0);
    std::vector<double> sc(1), out(1);
    const std::vector<double> zero = {0.0};
    for (std::size_t t = 30; t >= 1; --t) {
      oracle.score(x, t, sc);
      reverse_step(x, t, sched, sc, zero, out);
      x = out;
      const double nll = -gm.log_density(x, 0.0);
      if (nll > prev_nll + 1e-12) ok = false;
      prev_nll = nll;
    }
    if (ok) ++monotone;
  }
  CHECK(static_cast<double>(monotone) / trials >= 0.95);
}

TEST_CASE("trajectory: monotone steps, csv export") {
  Trajectory fwd(2);
  fwd.append(0, std::vector<double>{0.0, 0.0});
  fwd.append(1, std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(fwd.append(1, std::vector<double>{3.0, 4.0}), InputError);
  CHECK_THROWS_AS(fwd.append(2, std::vector<double>{3.0}), InputError);

  Trajectory rev(1);
  rev.append(10, std::vector<double>{1.0});
  rev.append(9, std::vector<double>{2.0});
  CHECK_THROWS_AS(rev.append(9, std::vector<double>{3.0}), InputError);

  std::ostringstream out;
  fwd.write_csv(out);
  CHECK(out.str() == "t,x0,x1\n0,0,0\n1,1,2\n");
}

}  // TEST_SUITE
