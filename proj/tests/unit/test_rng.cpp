#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "rdhp/parallel.hpp"
#include "rdhp/rng.hpp"

using rdhp::CounterRng;

TEST_CASE("same seed and stream give the same draws") {
  CounterRng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("streams and seeds are distinct") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 50; ++s) {
    firsts.insert(CounterRng(7, s).next());
    firsts.insert(CounterRng(s + 1000, 0).next());
  }
  CHECK(firsts.size() == 100);
}

TEST_CASE("derive does not advance the parent") {
  CounterRng a(1);
  const auto before = a.counter();
  CounterRng child = a.derive(5);
  CHECK(a.counter() == before);
  CHECK(child == a.derive(5));
  CHECK_FALSE(child == a.derive(6));
}

TEST_CASE("from_state resumes the sequence exactly") {
  CounterRng a(9, 2);
  for (int i = 0; i < 17; ++i) a.next();
  CounterRng b = CounterRng::from_state(a.key(), a.counter());
  for (int i = 0; i < 20; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("uniform moments") {
  CounterRng r(123);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
    s2 += u * u;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(var - 1.0 / 12.0) < 2e-3);
}

TEST_CASE("normal and exponential moments") {
  CounterRng r(77);
  const int n = 200000;
  double sn = 0, sn2 = 0, se = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal(1.0, 2.0);
    sn += z;
    sn2 += z * z;
    se += r.exponential(4.0);
  }
  const double mean = sn / n, sd = std::sqrt(sn2 / n - mean * mean);
  CHECK(std::abs(mean - 1.0) < 4.0 * 2.0 / std::sqrt(n));
  CHECK(std::abs(sd - 2.0) < 0.02);
  CHECK(std::abs(se / n - 0.25) < 4.0 * 0.25 / std::sqrt(n));
}

TEST_CASE("below covers the range without bias") {
  CounterRng r(5);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.below(7)];
  for (int c : counts) CHECK(std::abs(c - n / 7) < 4.0 * std::sqrt(n / 7.0));
}

TEST_CASE("for_each_index serial and parallel fill identically") {
  std::vector<std::uint64_t> a(1000), b(1000);
  CounterRng root(11);
  rdhp::for_each_index(rdhp::Execution::serial, a.size(), [&](std::size_t i) { a[i] = root.derive(i).next(); });
  rdhp::for_each_index(rdhp::Execution::parallel, b.size(), [&](std::size_t i) { b[i] = root.derive(i).next(); });
  CHECK(a == b);
}
