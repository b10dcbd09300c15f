#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "silo/histogram.hpp"
#include "silo/matrix.hpp"
#include "silo/rng.hpp"
#include "silo/special.hpp"
#include "support/oracles.hpp"

using silo::Rng;

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

TEST_CASE("rng stream matches published xoshiro256++ with splitmix64 seeding") {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL,
                             0xffffffffffffffffULL}) {
    Rng rng(seed);
    testing::RefXoshiro ref(seed);
    for (int i = 0; i < 256; ++i) {
      CAPTURE(seed);
      CAPTURE(i);
      REQUIRE(rng.next_u64() == ref.next());
    }
  }
}

TEST_CASE("child derives the documented (seed, stream) generator") {
  const std::uint64_t seed = 9001;
  const Rng parent(seed);
  for (std::uint64_t stream : {0ULL, 1ULL, 7ULL, 500ULL}) {
    // child seed = mix64(seed + golden * (stream + 1)); ref_splitmix64
    // pre-increments its state by golden, so start one golden short.
    std::uint64_t st = seed + kGolden * stream;
    const std::uint64_t child_seed = testing::ref_splitmix64(st);

    Rng child = parent.child(stream);
    CHECK(child.seed() == child_seed);
    testing::RefXoshiro ref(child_seed);
    for (int i = 0; i < 64; ++i) REQUIRE(child.next_u64() == ref.next());
  }

  // Distinct streams, and deriving children leaves the parent untouched.
  Rng a(seed), b(seed);
  (void)a.child(3);
  for (int i = 0; i < 16; ++i) REQUIRE(a.next_u64() == b.next_u64());
  CHECK(parent.child(0).next_u64() != parent.child(1).next_u64());
}

TEST_CASE("uniform01 is the top 53 bits over 2^53") {
  Rng rng(123);
  testing::RefXoshiro ref(123);
  for (int i = 0; i < 1000; ++i) {
    const double expect =
        static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
    REQUIRE(rng.uniform01() == expect);
  }

  Rng stat(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = stat.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("below matches the rejection construction and is unbiased-uniform") {
  const std::uint64_t bound = 12;
  Rng rng(55);
  testing::RefXoshiro ref(55);
  const std::uint64_t limit = bound * (0xffffffffffffffffULL / bound);
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t r;
    do {
      r = ref.next();
    } while (r >= limit);
    REQUIRE(rng.below(bound) == r % bound);
  }

  Rng one(9);
  for (int i = 0; i < 100; ++i) CHECK(one.below(1) == 0);

  Rng stat(2024);
  std::vector<int> hits(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[stat.below(10)];
  for (int k = 0; k < 10; ++k) {
    CAPTURE(k);
    CHECK(hits[k] > 9500);  // expected 10000, sd ~95
    CHECK(hits[k] < 10500);
  }
}

TEST_CASE("gaussian moments and determinism") {
  Rng a(31), b(31);
  for (int i = 0; i < 100; ++i) REQUIRE(a.gaussian() == b.gaussian());

  Rng stat(17);
  const int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = stat.gaussian(2.0);
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::fabs(mean) < 0.01);
  CHECK(sd > 1.99);
  CHECK(sd < 2.01);
}

TEST_CASE("erf basics and frozen value") {
  CHECK(silo::erf(0.0) == 0.0);
  CHECK(std::fabs(silo::erf(1.0) - 0.8427007929497148) < 1e-15);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = (rng.uniform01() - 0.5) * 12.0;
    REQUIRE(silo::erf(-x) == -silo::erf(x));
  }
  CHECK(silo::erf(10.0) == 1.0);
  CHECK(silo::erf(-10.0) == -1.0);
}

TEST_CASE("erf agrees with the series/continued-fraction oracle") {
  for (double x = 0.0; x <= 6.0; x += 0.0625) {
    CAPTURE(x);
    REQUIRE(std::fabs(silo::erf(x) - testing::oracle_erf(x)) <= 1e-13);
  }
  // Random points, both signs.
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform01() - 0.5) * 10.0;
    CAPTURE(x);
    REQUIRE(std::fabs(silo::erf(x) - testing::oracle_erf(x)) <= 1e-13);
  }
}

TEST_CASE("erf is monotone") {
  Rng rng(13);
  for (int i = 0; i < 10000; ++i) {
    double x = (rng.uniform01() - 0.5) * 16.0;
    double y = (rng.uniform01() - 0.5) * 16.0;
    if (x > y) std::swap(x, y);
    REQUIRE(silo::erf(x) <= silo::erf(y));
  }
  for (int i = 0; i < 10000; ++i) {
    double x = (rng.uniform01() - 0.5) * 6.0;
    double y = (rng.uniform01() - 0.5) * 6.0;
    if (x == y) continue;
    if (x > y) std::swap(x, y);
    REQUIRE(silo::erf(x) < silo::erf(y));
  }
}

TEST_CASE("erfc is accurate in the tail where 1 - erf cancels") {
  for (double x : {0.0, 0.3, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    CAPTURE(x);
    const double ref = testing::oracle_erfc(x);
    REQUIRE(std::fabs(silo::erfc(x) - ref) <= 1e-12 * ref);
  }
  for (double x : {-0.5, -2.0}) {
    CAPTURE(x);
    REQUIRE(std::fabs(silo::erfc(x) - testing::oracle_erfc(x)) <= 1e-13);
  }
  for (double x = -1.0; x <= 1.0; x += 0.125) {
    REQUIRE(std::fabs(silo::erf(x) + silo::erfc(x) - 1.0) <= 1e-14);
  }
}

TEST_CASE("erfinv roundtrips, matches the bisection oracle, frozen value") {
  CHECK(silo::erfinv(0.0) == 0.0);
  CHECK(std::fabs(silo::erfinv(0.5) - 0.4769362762044699) < 1e-15);

  Rng rng(29);
  for (int i = 0; i < 10000; ++i) {
    const double y = (rng.uniform01() - 0.5) * 1.999;
    const double x = silo::erfinv(y);
    CAPTURE(y);
    REQUIRE(std::fabs(silo::erf(x) - y) <= 1e-14);
    REQUIRE(silo::erfinv(-y) == -x);
  }

  for (double y = -0.95; y <= 0.95; y += 0.05) {
    CAPTURE(y);
    REQUIRE(std::fabs(silo::erfinv(y) - testing::oracle_erfinv(y)) <= 1e-12);
  }

  // Near-saturation inputs stay finite and consistent.
  const double ytail = 1.0 - 1e-12;
  const double xtail = silo::erfinv(ytail);
  CHECK(std::isfinite(xtail));
  CHECK(std::fabs(silo::erf(xtail) - ytail) <= 1e-14);

  CHECK_THROWS_AS((void)silo::erfinv(1.0), std::domain_error);
  CHECK_THROWS_AS((void)silo::erfinv(-1.0), std::domain_error);
  CHECK_THROWS_AS((void)silo::erfinv(1.5), std::domain_error);
}

TEST_CASE("sturges bin counts") {
  CHECK(silo::sturges_bin_count(1) == 1);
  CHECK(silo::sturges_bin_count(2) == 2);
  CHECK(silo::sturges_bin_count(100) == 8);
  CHECK(silo::sturges_bin_count(512) == 10);
  CHECK_THROWS_AS((void)silo::sturges_bin_count(0), std::invalid_argument);
}

TEST_CASE("histogram on a hand-computable sample") {
  const silo::HistogramSummary h = silo::build_histogram({0, 1, 2, 3}, 2);
  REQUIRE(h.bin_edges.size() == 3);
  CHECK(h.bin_edges[0] == 0.0);
  CHECK(h.bin_edges[1] == 1.5);
  CHECK(h.bin_edges[2] == 3.0);
  REQUIRE(h.counts.size() == 2);
  CHECK(h.counts[0] == 2);
  CHECK(h.counts[1] == 2);
  CHECK(h.mean == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(h.std == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(h.n == 4);
}

TEST_CASE("histogram edge cases") {
  // The max value lands in the last bin, not past it.
  const silo::HistogramSummary h2 = silo::build_histogram({0, 1}, 2);
  CHECK(h2.counts[0] == 1);
  CHECK(h2.counts[1] == 1);

  // Constant data get a unit-width window centered on the value.
  const silo::HistogramSummary hc = silo::build_histogram({5, 5, 5}, 3);
  CHECK(hc.bin_edges.front() == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(hc.bin_edges.back() == doctest::Approx(5.5).epsilon(1e-15));
  std::size_t total = 0;
  for (const std::size_t c : hc.counts) total += c;
  CHECK(total == 3);
  CHECK(hc.std == 0.0);
  CHECK(hc.mean == 5.0);

  CHECK_THROWS_AS((void)silo::build_histogram({}, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)silo::build_histogram({1.0}, 0),
                  std::invalid_argument);
}

TEST_CASE("histogram conserves mass and estimates normal moments") {
  Rng rng(71);
  std::vector<double> v(10000);
  for (auto& x : v) x = rng.gaussian();
  const silo::HistogramSummary h =
      silo::build_histogram(v, silo::sturges_bin_count(v.size()));
  std::size_t total = 0;
  for (const std::size_t c : h.counts) total += c;
  CHECK(total == v.size());
  CHECK(h.n == v.size());
  CHECK(std::fabs(h.mean) < 0.05);
  CHECK(std::fabs(h.std - 1.0) < 0.05);
  REQUIRE(h.bin_edges.size() == h.counts.size() + 1);
  for (std::size_t i = 1; i < h.bin_edges.size(); ++i) {
    REQUIRE(h.bin_edges[i] > h.bin_edges[i - 1]);
  }
}

TEST_CASE("gaussian_matrix determinism and moments") {
  Rng a(5), b(5);
  const silo::Matrix m1 = silo::gaussian_matrix(a, 13, 7, 0.5);
  const silo::Matrix m2 = silo::gaussian_matrix(b, 13, 7, 0.5);
  REQUIRE(m1.data == m2.data);

  Rng z(6);
  const silo::Matrix zero = silo::gaussian_matrix(z, 4, 4, 0.0);
  for (const double x : zero.data) REQUIRE(x == 0.0);

  Rng big(8);
  const silo::Matrix m = silo::gaussian_matrix(big, 1000, 1000, 0.7);
  double sum = 0.0, sq = 0.0;
  for (const double x : m.data) {
    sum += x;
    sq += x * x;
  }
  const double mean = sum / static_cast<double>(m.size());
  const double sd = std::sqrt(sq / static_cast<double>(m.size()) - mean * mean);
  CHECK(std::fabs(mean) < 0.005);
  CHECK(sd > 0.69);
  CHECK(sd < 0.71);
}
