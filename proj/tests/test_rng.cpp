#include <cmath>
#include <set>

#include "doctest.h"
#include "svi/rng.hpp"

using namespace svi;

TEST_SUITE("rng") {
  TEST_CASE("draws are pure functions of (seed, counter, slot)") {
    sample_stream s1 = make_stream(42);
    sample_stream s2 = make_stream(42);
    auto [b1, a1] = draw_batch(s1, 16);
    auto [b2, a2] = draw_batch(s2, 16);
    for (int j = 0; j < 16; ++j) {
      CHECK(b1.key(j).state == b2.key(j).state);
      for (int slot = 0; slot < 8; ++slot) {
        CHECK(b1.key(j).u01(slot) == b2.key(j).u01(slot));
        CHECK(b1.key(j).normal(slot) == b2.key(j).normal(slot));
      }
    }
    CHECK(a1.counter == a2.counter);
  }

  TEST_CASE("batches reserve disjoint counter ranges and count calls") {
    sample_stream s = make_stream(7);
    auto [b1, s1] = draw_batch(s, 5);
    auto [b2, s2] = draw_batch(s1, 3);
    CHECK(b1.counter0 == 0);
    CHECK(b2.counter0 == 5);
    CHECK(s2.counter == 8);
    CHECK(s1.calls == 5);
    CHECK(s2.calls == 8);
    std::set<std::uint64_t> states;
    for (int j = 0; j < 5; ++j) states.insert(b1.key(j).state);
    for (int j = 0; j < 3; ++j) states.insert(b2.key(j).state);
    CHECK(states.size() == 8);
  }

  TEST_CASE("u01 lands in (0,1] and different seeds decorrelate") {
    const sample_key a{detail::mix64(1)};
    const sample_key b{detail::mix64(2)};
    int equal = 0;
    for (int i = 0; i < 1000; ++i) {
      const double u = a.u01(i);
      CHECK(u > 0.0);
      CHECK(u <= 1.0);
      if (a.bits(i) == b.bits(i)) ++equal;
    }
    CHECK(equal == 0);
  }

  TEST_CASE("normal moments") {
    const sample_key k{detail::mix64(123)};
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = k.normal(i);
      sum += z;
      sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::fabs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
  }

  TEST_CASE("uniform respects its bounds") {
    const sample_key k{detail::mix64(9)};
    for (int i = 0; i < 1000; ++i) {
      const double u = k.uniform(i, 30.0, 60.0);
      CHECK(u >= 30.0);
      CHECK(u <= 60.0);
    }
  }
}
