#include <cmath>
#include <vector>

#include "doctest.h"
#include "otdiff/brenier.hpp"
#include "otdiff/common.hpp"
#include "otdiff/rng.hpp"

using namespace otdiff;

namespace {

BrenierPotential two_targets(std::vector<double> h = {0.0, 0.0}) {
  return BrenierPotential(TargetSet(2, {1.0, 0.0, -1.0, 0.0}, {0.5, 0.5}), std::move(h));
}

BrenierPotential random_potential(std::size_t dim, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> points(dim * count);
  std::vector<double> heights(count);
  rng.fill_normal(points);
  rng.fill_normal(heights);
  return BrenierPotential(TargetSet::uniform(dim, std::move(points)), std::move(heights));
}

// Independent oracle: plain loop over every hyperplane.
std::pair<std::size_t, double> brute_force_best(const BrenierPotential& p,
                                                std::span<const double> x) {
  std::size_t best_i = 0;
  double best_v = -1e300;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double v = dot(x, p.targets().point(i)) + p.heights()[i];
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  return {best_i, best_v};
}

}  // namespace

TEST_SUITE("brenier") {

TEST_CASE("target set invariants") {
  CHECK_THROWS_AS(TargetSet(2, {1.0, 0.0}, {0.5}), InputError);        // weight sum
  CHECK_THROWS_AS(TargetSet(2, {1.0, 0.0}, {-0.2}), InputError);       // negative weight
  CHECK_THROWS_AS(TargetSet(1, {}, {}), InputError);                   // empty
  CHECK_THROWS_AS(TargetSet(2, {1.0, 0.0, 1.0, 0.0}, {0.5, 0.5}), InputError);  // duplicates
  CHECK_THROWS_AS(TargetSet(2, {1.0, 0.0, 2.0}, {0.5, 0.5}), InputError);       // ragged

  const TargetSet ok(2, {1.0, 0.0, -1.0, 0.0}, {0.75, 0.25});
  CHECK(ok.size() == 2);
  CHECK(ok.dim() == 2);
  CHECK(ok.point(1)[0] == -1.0);
}

TEST_CASE("value: single hyperplane is a plain inner product") {
  const BrenierPotential p(TargetSet(2, {1.0, 0.0}, {1.0}), {0.0});
  const std::vector<double> x = {2.0, 3.0};
  CHECK(p.value(x) == 2.0);
}

TEST_CASE("value: symmetric two-plane envelope") {
  const BrenierPotential p = two_targets();
  const std::vector<double> x = {0.5, 7.0};
  CHECK(p.value(x) == 0.5);
  CHECK(p.cell_index(x) == 0);
}

TEST_CASE("value and cell match exhaustive scan on random instances") {
  const BrenierPotential p = random_potential(3, 20, 42);
  Rng rng(7);
  std::vector<double> x(3);
  for (int trial = 0; trial < 200; ++trial) {
    rng.fill_normal(x);
    const auto [bi, bv] = brute_force_best(p, x);
    CHECK(p.value(x) == bv);
    CHECK(p.cell_index(x) == bi);
  }
}

TEST_CASE("cell index: sign of the dominant coordinate") {
  const BrenierPotential p = two_targets();
  CHECK(p.cell_index(std::vector<double>{0.3, 1.0}) == 0);
  CHECK(p.cell_index(std::vector<double>{-0.3, 1.0}) == 1);
}

TEST_CASE("cell index: exact ties go to the lowest index") {
  const BrenierPotential p = two_targets();
  CHECK(p.cell_index(std::vector<double>{0.0, 5.0}) == 0);
}

TEST_CASE("ot_map: single cell covers everything") {
  const BrenierPotential p(TargetSet(2, {1.5, -2.0}, {1.0}), {0.0});
  Rng rng(3);
  std::vector<double> x(2);
  for (int trial = 0; trial < 20; ++trial) {
    rng.fill_normal(x);
    const auto y = p.ot_map(x);
    CHECK(y[0] == 1.5);
    CHECK(y[1] == -2.0);
  }
}

TEST_CASE("ot_map: picks the correct target") {
  const BrenierPotential p = two_targets();
  const auto y = p.ot_map(std::vector<double>{-2.0, 0.4});
  CHECK(y[0] == -1.0);
  CHECK(y[1] == 0.0);
}

TEST_CASE("ot_map range closure") {
  const BrenierPotential p = random_potential(2, 15, 11);
  Rng rng(12);
  std::vector<double> x(2);
  for (int trial = 0; trial < 100; ++trial) {
    rng.fill_normal(x);
    const std::size_t idx = p.cell_index(x);
    const auto y = p.ot_map(x);
    CHECK(idx < p.size());
    CHECK(y.data() == p.targets().point(idx).data());
  }
}

TEST_CASE("dimension mismatch raises input errors") {
  const BrenierPotential p = two_targets();
  const std::vector<double> bad = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(p.value(bad), InputError);
  CHECK_THROWS_AS(p.cell_index(bad), InputError);
  CHECK_THROWS_AS(p.ot_map(bad), InputError);
}

TEST_CASE("property: convexity of the envelope") {
  const BrenierPotential p = random_potential(3, 25, 99);
  Rng rng(100);
  std::vector<double> a(3), b(3), mix(3);
  for (int trial = 0; trial < 100; ++trial) {
    rng.fill_normal(a);
    rng.fill_normal(b);
    const double t = rng.uniform01();
    for (std::size_t k = 0; k < 3; ++k) mix[k] = t * a[k] + (1.0 - t) * b[k];
    CHECK(p.value(mix) <= t * p.value(a) + (1.0 - t) * p.value(b) + 1e-9);
  }
}

TEST_CASE("property: subgradient identity holds bitwise") {
  const BrenierPotential p = random_potential(4, 30, 5);
  Rng rng(6);
  std::vector<double> x(4);
  for (int trial = 0; trial < 100; ++trial) {
    rng.fill_normal(x);
    const std::size_t idx = p.cell_index(x);
    CHECK(p.value(x) == dot(x, p.ot_map(x)) + p.heights()[idx]);
  }
}

TEST_CASE("property: adding a constant to all heights leaves the map unchanged") {
  const BrenierPotential base = random_potential(2, 12, 21);
  for (double c : {1.0, -3.5, 0.25}) {
    std::vector<double> shifted = base.heights();
    for (double& v : shifted) v += c;
    const BrenierPotential moved(base.targets(), shifted);
    Rng rng(22);
    std::vector<double> x(2);
    for (int trial = 0; trial < 100; ++trial) {
      rng.fill_normal(x);
      CHECK(moved.cell_index(x) == base.cell_index(x));
    }
  }
}

}  // TEST_SUITE
