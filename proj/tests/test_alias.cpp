#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "apslda/alias_table.hpp"
#include "apslda/error.hpp"
#include "apslda/rng.hpp"

using namespace apslda;

TEST_CASE("single bucket always wins") {
  const double w[] = {5.0};
  const AliasTable t = AliasTable::build(w);
  CHECK(t.prob_of(0) == doctest::Approx(1.0).epsilon(1e-14));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(t.sample(rng) == 0);
}

TEST_CASE("prob_of reconstructs the normalized weights") {
  const std::vector<double> w = {1.0, 2.0, 3.0};
  const AliasTable t = AliasTable::build(w);
  CHECK(std::abs(t.prob_of(0) - 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(t.prob_of(1) - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(t.prob_of(2) - 1.0 / 2.0) < 1e-12);

  const std::vector<double> w2 = {2.0, 2.0};
  CHECK(std::abs(AliasTable::build(w2).prob_of(0) - 0.5) < 1e-12);
  const std::vector<double> w3 = {1.0, 3.0};
  CHECK(std::abs(AliasTable::build(w3).prob_of(1) - 0.75) < 1e-12);
}

TEST_CASE("zero-weight buckets are never drawn") {
  const std::vector<double> w = {0.0, 7.0};
  const AliasTable t = AliasTable::build(w);
  CHECK(t.prob_of(0) == doctest::Approx(0.0).epsilon(1e-14));
  Rng rng(2);
  for (int i = 0; i < 200; ++i) CHECK(t.sample(rng) == 1);
}

TEST_CASE("probabilities sum to one") {
  const std::vector<double> w = {0.3, 0.0, 5.5, 1.2, 0.01};
  const AliasTable t = AliasTable::build(w);
  double sum = 0.0;
  for (uint32_t k = 0; k < t.size(); ++k) sum += t.prob_of(k);
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("invalid weights are rejected") {
  CHECK_THROWS_AS(AliasTable::build(std::vector<double>{}), ArgError);
  CHECK_THROWS_AS(AliasTable::build(std::vector<double>{0.0, 0.0}), ArgError);
  CHECK_THROWS_AS(AliasTable::build(std::vector<double>{1.0, -0.5}), ArgError);
  CHECK_THROWS_AS(AliasTable::build(std::vector<double>{1.0, std::nan("")}), ArgError);
  CHECK_THROWS_AS(
      AliasTable::build(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}),
      ArgError);
}

TEST_CASE("uniform weights: 4e5 seeded draws within 0.01 of 1/4") {
  const std::vector<double> w = {1.0, 1.0, 1.0, 1.0};
  const AliasTable t = AliasTable::build(w);
  Rng rng(42);
  std::vector<uint64_t> hits(4, 0);
  const uint64_t n = 400000;
  for (uint64_t i = 0; i < n; ++i) ++hits[t.sample(rng)];
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(static_cast<double>(hits[k]) / n - 0.25) < 0.01);
}

TEST_CASE("skewed weights: 6e5 draws track the exact distribution") {
  const std::vector<double> w = {1.0, 2.0, 3.0};
  const AliasTable t = AliasTable::build(w);
  Rng rng(7);
  std::vector<uint64_t> hits(3, 0);
  const uint64_t n = 600000;
  for (uint64_t i = 0; i < n; ++i) ++hits[t.sample(rng)];
  const double expected[3] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0};
  double max_dev = 0.0;
  for (int k = 0; k < 3; ++k)
    max_dev = std::max(max_dev, std::abs(static_cast<double>(hits[k]) / n - expected[k]));
  CHECK(max_dev < 0.005);
}

TEST_CASE("identical seeds give identical draw sequences") {
  const std::vector<double> w = {0.4, 3.1, 2.2, 0.9};
  const AliasTable t = AliasTable::build(w);
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) CHECK(t.sample(a) == t.sample(b));
}

TEST_CASE("reconstruction error below 1e-10 for random weight vectors") {
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const uint32_t k = 1 + rng.bounded(64);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) {
      x = rng.uniform() < 0.15 ? 0.0 : rng.uniform() * 10.0;
      total += x;
    }
    if (total == 0.0) w[rng.bounded(k)] = 1.0, total = 1.0;
    const AliasTable t = AliasTable::build(w);
    for (uint32_t i = 0; i < k; ++i)
      CHECK(std::abs(t.prob_of(i) - w[i] / total) < 1e-10);
  }
}

TEST_CASE("chi-square goodness of fit at significance 0.001") {
  // Upper 0.999 quantiles of chi-square, dof = K-1.
  const struct {
    uint32_t k;
    double critical;
  } cases[] = {{2, 10.828}, {10, 27.877}, {100, 148.230}};

  for (const auto& c : cases) {
    Rng wrng(c.k * 31 + 5);
    std::vector<double> w(c.k);
    for (auto& x : w) x = 0.1 + wrng.uniform() * 9.9;
    const AliasTable t = AliasTable::build(w);

    std::vector<uint64_t> hits(c.k, 0);
    Rng rng(c.k);
    const uint64_t n = 1000000;
    for (uint64_t i = 0; i < n; ++i) ++hits[t.sample(rng)];

    double chi2 = 0.0;
    for (uint32_t i = 0; i < c.k; ++i) {
      const double expect = t.prob_of(i) * static_cast<double>(n);
      const double diff = static_cast<double>(hits[i]) - expect;
      chi2 += diff * diff / expect;
    }
    INFO("K=" << c.k << " chi2=" << chi2);
    CHECK(chi2 < c.critical);
  }
}

TEST_CASE("construction scales linearly, not quadratically") {
  auto build_time = [](uint32_t k, int reps) {
    Rng rng(k);
    std::vector<double> w(k);
    for (auto& x : w) x = 0.01 + rng.uniform();
    // Warm-up plus median of several timed batches.
    std::vector<double> times;
    for (int t = 0; t < 7; ++t) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < reps; ++r) {
        volatile double sink = AliasTable::build(w).total_weight();
        (void)sink;
      }
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[3];
  };

  const double t1 = build_time(4096, 200);
  const double t2 = build_time(8192, 200);
  INFO("t(4096)=" << t1 << " t(8192)=" << t2);
  CHECK(t2 / t1 < 3.0);  // doubling K should roughly double, never quadruple
}
