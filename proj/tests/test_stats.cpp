#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "dctfhe/rng.hpp"
#include "dctfhe/stats.hpp"

using namespace dctfhe;

namespace {

CorrectnessVector bernoulli_vector(size_t n, double p, uint64_t seed) {
  CorrectnessVector v;
  v.correct.resize(n);
  const CounterRng rng(seed, 0xacc);
  for (size_t i = 0; i < n; ++i) v.correct[i] = rng.uniform(i) < p ? 1 : 0;
  return v;
}

}  // namespace

TEST_CASE("subset accuracies") {
  SUBCASE("all-true vector gives unit accuracies") {
    CorrectnessVector v;
    v.correct.assign(5000, 1);
    const SubsetAccuracies s = subset_accuracies(v, 20, 200, 1);
    REQUIRE(s.accuracies.size() == 20);
    for (double a : s.accuracies) CHECK(a == 1.0);
    CHECK(!s.with_replacement);
  }
  SUBCASE("deterministic under a fixed seed") {
    const CorrectnessVector v = bernoulli_vector(6000, 0.8, 5);
    const SubsetAccuracies a = subset_accuracies(v, 20, 200, 99);
    const SubsetAccuracies b = subset_accuracies(v, 20, 200, 99);
    CHECK(a.accuracies == b.accuracies);
    const SubsetAccuracies c = subset_accuracies(v, 20, 200, 100);
    CHECK(a.accuracies != c.accuracies);
  }
  SUBCASE("subset means track the true rate") {
    const CorrectnessVector v = bernoulli_vector(10000, 0.9, 7);
    const SubsetAccuracies s = subset_accuracies(v, 20, 200, 11);
    const double mean =
        std::accumulate(s.accuracies.begin(), s.accuracies.end(), 0.0) / s.accuracies.size();
    const double sigma = std::sqrt(0.9 * 0.1 / 200.0) / std::sqrt(20.0);
    CHECK(std::abs(mean - 0.9) <= 4 * sigma);  // generous: finite-population draw
  }
  SUBCASE("small vectors fall back to replacement and say so") {
    const CorrectnessVector v = bernoulli_vector(100, 0.5, 9);
    const SubsetAccuracies s = subset_accuracies(v, 20, 200, 1);
    CHECK(s.with_replacement);
    REQUIRE(s.accuracies.size() == 20);
  }
  SUBCASE("empty vector throws") {
    CorrectnessVector v;
    CHECK_THROWS_AS(subset_accuracies(v, 20, 200, 1), std::invalid_argument);
  }
}

TEST_CASE("bootstrap confidence intervals") {
  SUBCASE("constant accuracies give a zero-width interval") {
    const std::vector<double> accs(20, 0.85);
    const BootstrapResult r = bootstrap_ci(accs, 10000, 0.95, 3);
    CHECK(r.estimate == doctest::Approx(85.0));
    CHECK(r.ci_low == doctest::Approx(85.0));
    CHECK(r.ci_high == doctest::Approx(85.0));
  }
  SUBCASE("bounds bracket the estimate") {
    const CorrectnessVector v = bernoulli_vector(4000, 0.9, 17);
    const SubsetAccuracies s = subset_accuracies(v, 20, 200, 18);
    const BootstrapResult r = bootstrap_ci(s.accuracies, 10000, 0.95, 19);
    CHECK(r.ci_low <= r.estimate);
    CHECK(r.estimate <= r.ci_high);
    CHECK(r.ci_high - r.ci_low >= 0.0);
  }
  SUBCASE("deterministic under fixed seeds") {
    const CorrectnessVector v = bernoulli_vector(4000, 0.7, 23);
    const SubsetAccuracies s = subset_accuracies(v, 20, 200, 29);
    const BootstrapResult a = bootstrap_ci(s.accuracies, 2000, 0.95, 31);
    const BootstrapResult b = bootstrap_ci(s.accuracies, 2000, 0.95, 31);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.ci_high == b.ci_high);
  }
  SUBCASE("fewer than two subsets throws") {
    CHECK_THROWS_AS(bootstrap_ci({0.5}, 100, 0.95, 1), std::invalid_argument);
  }
  SUBCASE("doubling subset size roughly halves the interval width") {
    double widths[2] = {0, 0};
    const int sizes[2] = {200, 800};  // 4x size -> ~2x narrower
    for (int trial = 0; trial < 40; ++trial) {
      const CorrectnessVector v = bernoulli_vector(40000, 0.9, 100 + trial);
      for (int j = 0; j < 2; ++j) {
        const SubsetAccuracies s = subset_accuracies(v, 20, sizes[j], 7 + trial);
        const BootstrapResult r = bootstrap_ci(s.accuracies, 2000, 0.95, 11 + trial);
        widths[j] += r.ci_high - r.ci_low;
      }
    }
    const double shrink = widths[0] / widths[1];
    CHECK(shrink >= 1.5);  // ideal 2.0, allow sampling noise
    CHECK(shrink <= 2.7);
  }
  SUBCASE("coverage of a known bernoulli rate is near nominal") {
    int covered = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
      const CorrectnessVector v = bernoulli_vector(4000, 0.9, 1000 + trial);
      const SubsetAccuracies s = subset_accuracies(v, 20, 200, 2000 + trial);
      const BootstrapResult r = bootstrap_ci(s.accuracies, 10000, 0.95, 3000 + trial);
      if (r.ci_low <= 90.0 && 90.0 <= r.ci_high) ++covered;
    }
    CHECK(covered >= static_cast<int>(0.90 * trials));
  }
}
