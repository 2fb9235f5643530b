#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rdhp/errors.hpp"
#include "rdhp/hawkes_sim.hpp"
#include "rdhp/pipeline.hpp"

using namespace rdhp;

namespace {

HawkesParams two_type() {
  return HawkesParams({0.3, 0.2}, {{0.4, 0.3}, {0.5, 0.2}}, {{1.5, 2.0}, {1.0, 3.0}});
}

// Intensity written out from the kernel definition, independent of the library.
double naive_intensity(const HawkesParams& p, const EventSequence& s, double t, Mark o) {
  double v = p.mu()[o];
  for (const auto& e : s.events)
    if (e.time < t) v += p.alpha()[o][e.mark] * std::exp(-p.gamma()[o][e.mark] * (t - e.time));
  return v;
}

}  // namespace

TEST_CASE("zero excitation reduces to the base rate") {
  const HawkesParams p({0.5}, {{0.0}}, {{1.0}});
  EventSequence s{"s", {{1.0, 0}, {2.0, 0}}};
  CHECK(intensity_at(p, s, 10.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("one past event at t=0 queried at t=1") {
  const HawkesParams p({0.2}, {{0.8}}, {{1.0}});
  EventSequence s{"s", {{0.0, 0}}};
  CHECK(intensity_at(p, s, 1.0, 0) == doctest::Approx(0.2 + 0.8 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(intensity_at(p, s, 1.0, 0) == doctest::Approx(0.4943).epsilon(1e-4));
}

TEST_CASE("empty history gives mu") {
  const HawkesParams p = two_type();
  EventSequence s{"s", {}};
  CHECK(intensity_at(p, s, 3.7, 1) == 0.2);
}

TEST_CASE("negative query time is a domain error") {
  EventSequence s{"s", {}};
  CHECK_THROWS_AS(intensity_at(two_type(), s, -0.1, 0), DomainError);
}

TEST_CASE("only strictly earlier events count") {
  const HawkesParams p({0.1}, {{1.0}}, {{1.0}});
  EventSequence s{"s", {{1.0, 0}}};
  CHECK(intensity_at(p, s, 1.0, 0) == 0.1);
}

TEST_CASE("intensity decays between events and jumps by alpha at an event") {
  const HawkesParams p = two_type();
  const SimulationResult r = simulate(p, 20.0, 4);
  const EventSequence& s = r.sequence;
  REQUIRE(s.size() > 3);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = s.events[i].time, b = s.events[i + 1].time;
    for (Mark o = 0; o < 2; ++o) {
      double prev = intensity_at(p, s, a + 1e-12, o);
      for (int k = 1; k <= 5; ++k) {
        const double t = a + (b - a) * k / 5.0;
        const double v = intensity_at(p, s, t, o);
        CHECK(v <= prev + 1e-12);
        prev = v;
      }
      const double before = naive_intensity(p, s, a, o);
      const double after = intensity_at(p, s, a + 1e-12, o);
      CHECK(after - before == doctest::Approx(p.alpha()[o][s.events[i].mark]).epsilon(1e-6));
    }
  }
}

TEST_CASE("homogeneous Poisson count over a long horizon") {
  const HawkesParams p({2.0}, {{0.0}}, {{1.0}});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = simulate(p, 1000.0, seed);
    CHECK(std::abs(static_cast<double>(r.sequence.size()) - 2000.0) < 3.0 * std::sqrt(2000.0));
  }
}

TEST_CASE("zero horizon gives an empty sequence") {
  CHECK(simulate(two_type(), 0.0, 1).sequence.empty());
}

TEST_CASE("simulation is deterministic and sorted within the horizon") {
  const auto a = simulate(two_type(), 50.0, 9), b = simulate(two_type(), 50.0, 9);
  CHECK(a.sequence.events == b.sequence.events);
  for (std::size_t i = 0; i < a.sequence.size(); ++i) {
    CHECK(a.sequence.events[i].time >= 0.0);
    CHECK(a.sequence.events[i].time <= 50.0);
    if (i) CHECK(a.sequence.events[i - 1].time <= a.sequence.events[i].time);
  }
}

TEST_CASE("unstable params still simulate but get capped") {
  const HawkesParams p({1.0}, {{3.0}}, {{1.0}});
  CHECK_FALSE(p.stable());
  SimulationOptions opt;
  opt.max_events = 500;
  const auto r = simulate(p, 100.0, 1, opt);
  CHECK(r.truncated);
  CHECK(r.sequence.size() == 500);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(HawkesParams({-1.0}, {{0.0}}, {{1.0}}), ConfigError);
  CHECK_THROWS_AS(HawkesParams({1.0}, {{0.0}}, {{0.0}}), ConfigError);
  CHECK_THROWS_AS(HawkesParams({1.0, 1.0}, {{0.0}}, {{1.0}}), ConfigError);
  CHECK(cyclic_hawkes().stable());
}

TEST_CASE("log likelihood of unit-rate Poisson") {
  const HawkesParams p({1.0}, {{0.0}}, {{1.0}});
  CHECK(log_likelihood(p, EventSequence{"s", {{0.5, 0}}}, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  const HawkesParams p2({2.0}, {{0.0}}, {{1.0}});
  CHECK(log_likelihood(p2, EventSequence{"s", {}}, 3.0) == doctest::Approx(-6.0).epsilon(1e-14));
}

TEST_CASE("alpha = 0 log likelihood equals the Poisson formula") {
  const HawkesParams p({0.4, 1.3}, {{0, 0}, {0, 0}}, {{1, 1}, {1, 1}});
  const auto s = simulate(p, 10.0, 3).sequence;
  double expect = -10.0 * 1.7;
  for (const auto& e : s.events) expect += std::log(p.mu()[e.mark]);
  CHECK(log_likelihood(p, s, 10.0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("zero intensity at an observed event gives -infinity") {
  const HawkesParams p({0.0, 1.0}, {{0, 0}, {0, 0}}, {{1, 1}, {1, 1}});
  const double ll = log_likelihood(p, EventSequence{"s", {{0.5, 0}}}, 1.0);
  CHECK(std::isinf(ll));
  CHECK(ll < 0);
}

TEST_CASE("closed-form compensator matches adaptive quadrature on a 5-event sequence") {
  const HawkesParams p = two_type();
  const EventSequence s{"s", {{0.3, 0}, {0.9, 1}, {1.4, 0}, {2.2, 1}, {2.25, 0}}};
  const double t_max = 3.0;
  // integrate piecewise between events so the integrand is smooth on each piece
  std::vector<double> knots{0.0};
  for (const auto& e : s.events) knots.push_back(e.time);
  knots.push_back(t_max);
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    auto f = [&](double t) { return naive_intensity(p, s, t, 0) + naive_intensity(p, s, t, 1); };
    // evaluate strictly inside each piece; events at the left knot count
    const double a = knots[k], b = knots[k + 1];
    if (b > a)
      integral += oracle::adaptive_simpson([&](double t) { return f(std::min(std::max(t, a + 1e-15), b)); }, a, b, 1e-12);
  }
  CHECK(compensator(p, s, t_max, 0) + compensator(p, s, t_max, 1) == doctest::Approx(integral).epsilon(1e-9));
  double logsum = 0.0;
  for (const auto& e : s.events) logsum += std::log(naive_intensity(p, s, e.time, e.mark));
  CHECK(std::abs(log_likelihood(p, s, t_max) - (logsum - integral)) < 1e-6);
}

TEST_CASE("expected counts match the compensator within 4 standard errors") {
  const HawkesParams p = two_type();
  const std::size_t runs = 400;
  const double t_max = 15.0;
  for (Mark o = 0; o < 2; ++o) {
    double diff_sum = 0.0, diff_sq = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
      const auto s = simulate(p, t_max, 1000 + r).sequence;
      double count = 0;
      for (const auto& e : s.events) count += e.mark == o;
      const double d = count - compensator(p, s, t_max, o);
      diff_sum += d;
      diff_sq += d * d;
    }
    const double mean = diff_sum / runs;
    const double se = std::sqrt((diff_sq / runs - mean * mean) / runs);
    CHECK(std::abs(mean) < 4.0 * se);
  }
}

TEST_CASE("time-rescaled intervals are Exponential(1)") {
  const HawkesParams p = two_type();
  std::vector<double> all;
  std::uint64_t seed = 0;
  while (all.size() < 10000) {
    const auto s = simulate(p, 200.0, seed++).sequence;
    const auto z = rescaled_intervals(p, s);
    all.insert(all.end(), z.begin(), z.end());
  }
  const double d = oracle::ks_statistic_exp1(all);
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(all.size())));
}

TEST_CASE("simulate_dataset serial and parallel are identical") {
  const auto a = simulate_dataset(cyclic_hawkes(), 64, 12.0, 5, Execution::serial);
  const auto b = simulate_dataset(cyclic_hawkes(), 64, 12.0, 5, Execution::parallel);
  CHECK(a.dataset == b.dataset);
  CHECK(a.dropped_empty == b.dropped_empty);
  CHECK_NOTHROW(validate(a.dataset));
}
