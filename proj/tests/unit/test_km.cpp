#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

#include "curemst/errors.hpp"
#include "curemst/km.hpp"

using namespace curemst;
using doctest::Approx;

TEST_CASE("hand example D") {
  const auto f = fit_km(fx::D());
  REQUIRE(f.steps() == 2);
  CHECK(f.event_times == std::vector<double>{1, 2});
  CHECK(f.survival[0] == Approx(0.75));
  CHECK(f.survival[1] == Approx(0.5));
  CHECK(f.cure_fraction == Approx(0.5));
  CHECK(f.last_event_time == 2.0);
  CHECK(f.v_hat[0] == Approx(1.0 / 3.0));
  CHECK(f.v_hat[1] == Approx(1.0));
  CHECK(f.at_risk == std::vector<std::size_t>{4, 3});
  CHECK(f.n == 4);
}

TEST_CASE("no censoring, three events") {
  const auto f = fit_km(fx::sample({{1, 1}, {2, 1}, {3, 1}}));
  CHECK(f.survival[0] == Approx(2.0 / 3.0));
  CHECK(f.survival[1] == Approx(1.0 / 3.0));
  CHECK(f.survival[2] == 0.0);
  CHECK(f.cure_fraction == 0.0);
  CHECK(std::isfinite(f.v_hat[2]));
  // Increment at the emptying event is skipped.
  CHECK(f.v_hat[2] == f.v_hat[1]);
}

TEST_CASE("step evaluation") {
  const auto f = fit_km(fx::D());
  CHECK(eval_survival(f, 0.0) == 1.0);
  CHECK(eval_survival(f, 1.0) == Approx(0.75));
  CHECK(eval_survival(f, 1.5) == Approx(0.75));
  CHECK(eval_survival(f, 100.0) == Approx(0.5));
  CHECK(eval_v_hat(f, 0.5) == 0.0);
  CHECK(eval_v_hat(f, 2.5) == Approx(1.0));
}

TEST_CASE("pooled fit") {
  const TwoSampleDataset ds(fx::D(), fx::sample({{1, 1}, {2, 1}, {3, 1}}, 2));
  const auto f = fit_pooled(ds);
  CHECK(f.n == 7);
  CHECK(f.at_risk[0] == 7);
  CHECK(f.events[0] == 2);
  CHECK(f.survival[0] == Approx(5.0 / 7.0));

  const auto a = fx::random_cure_sample(30, 9);
  const auto twice = fit_pooled(TwoSampleDataset(a, a));
  const auto single = fit_km(a);
  REQUIRE(twice.steps() == single.steps());
  for (std::size_t k = 0; k < single.steps(); ++k) CHECK(twice.survival[k] == Approx(single.survival[k]));
}

TEST_CASE("events before censorings at tied times") {
  const auto f = fit_km(fx::sample({{1, 0}, {1, 1}, {2, 1}, {3, 0}}));
  CHECK(f.at_risk[0] == 4);
  CHECK(f.survival[0] == Approx(0.75));
}

TEST_CASE("no events is an error") {
  CHECK_THROWS_AS(fit_km(fx::sample({{1, 0}, {1, 0}})), Error);
}

TEST_CASE("agrees with the naive recount on random samples") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = fx::random_cure_sample(40, seed, 0.3, seed % 2 == 0);
    if (s.event_count() == 0) continue;
    const auto f = fit_km(s);
    const auto o = oracle::km(fx::obs(s));
    REQUIRE(f.steps() == o.t.size());
    for (std::size_t k = 0; k < f.steps(); ++k) {
      CHECK(f.event_times[k] == o.t[k]);
      CHECK(f.survival[k] == Approx(o.s[k]).epsilon(1e-12));
      CHECK(f.v_hat[k] == Approx(o.v[k]).epsilon(1e-12));
      if (k) {
        CHECK(f.survival[k] <= f.survival[k - 1]);
        CHECK(f.v_hat[k] >= f.v_hat[k - 1]);
      }
    }
    CHECK(f.cure_fraction == f.survival.back());
  }
}

TEST_CASE("scale equivariance") {
  const auto s = fx::random_cure_sample(60, 5);
  const auto f = fit_km(s);
  const auto g = fit_km(s.scaled(3.5));
  REQUIRE(f.steps() == g.steps());
  for (std::size_t k = 0; k < f.steps(); ++k) {
    CHECK(g.event_times[k] == Approx(3.5 * f.event_times[k]));
    CHECK(g.survival[k] == f.survival[k]);
    CHECK(g.v_hat[k] == f.v_hat[k]);
  }
  CHECK(g.cure_fraction == f.cure_fraction);
}

TEST_CASE("without censoring the curve is the empirical survival") {
  Rng rng(77);
  std::vector<SurvivalRecord> recs;
  for (int i = 0; i < 25; ++i) recs.push_back({rng.exponential(1.0), 1, {}, {}});
  const auto f = fit_km(SurvivalSample(recs));
  for (std::size_t k = 0; k < f.steps(); ++k) {
    double above = 0;
    for (const auto& r : recs) above += r.time > f.event_times[k];
    CHECK(f.survival[k] == Approx(above / 25.0).epsilon(1e-14));
  }
}
