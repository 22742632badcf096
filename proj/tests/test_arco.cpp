#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nof1/arco.hpp"
#include "nof1/errors.hpp"
#include "nof1/stats.hpp"

using namespace nof1;

namespace {

ArcoParams lag_free(double sigma) {
  ArcoParams p;
  p.beta0 = 1.0;
  p.betaX = 2.0;
  p.sigma_eps = sigma;
  return p;
}

ArcoParams carryover_example() {
  ArcoParams p;
  p.beta0 = 1.0;
  p.betaX = 1.0;
  p.beta_co = 0.2;
  p.beta_Xco = 0.1;
  p.beta_ar = 0.5;
  p.beta_Xar = 0.1;
  return p;
}

SimConfig sim_config(int m, std::uint64_t seed) {
  SimConfig c;
  c.m_analysis = m;
  c.seed = SeedSpec{seed};
  return c;
}

}  // namespace

TEST_SUITE("arco") {

TEST_CASE("conditional mean follows the lag-1 carryover mechanism") {
  ArcoParams p = carryover_example();
  p.beta_ex = {0.5};
  // 1 + 1*1 + 0.2*1 + 0.1*1 + 0.5*2 + 0.1*2 + 0.5*4
  CHECK(p.conditional_mean(1, 1.0, 2.0, {4.0}) == doctest::Approx(5.5));
  CHECK(p.conditional_mean(0, 1.0, 2.0, {4.0}) == doctest::Approx(4.2));
}

TEST_CASE("long-run mean and effect formulas") {
  CHECK(long_run_mean(ArcoParams::study_default(), 0.5) == doctest::Approx(12.75).epsilon(1e-14));
  const double mu = long_run_mean(carryover_example(), 0.5);
  CHECK(mu == doctest::Approx(1.625 / 0.45).epsilon(1e-14));
  CHECK(long_run_apte(carryover_example(), 0.5, 3.61111) == doctest::Approx(1.411111).epsilon(1e-6));
  CHECK(long_run_apte(ArcoParams::study_default(), 0.5, 12.75) == doctest::Approx(1.1));

  ArcoParams unstable = ArcoParams::study_default();
  unstable.beta_ar = 1.0;
  CHECK_THROWS_AS(long_run_mean(unstable, 0.5), ConfigError);
  CHECK_THROWS_AS(unstable.require_stationary(), ConfigError);
}

TEST_CASE("randomized long-run simulation settles at the formula") {
  SimConfig c = sim_config(200000, 5);
  c.randomized_mode = true;
  const auto ds = simulate_dataset(ArcoParams::study_default(), PropensityParams::study_default(), c);
  const auto y = ds.outcomes();
  CHECK(std::abs(mean(y) / 12.75 - 1.0) < 0.01);

  SimConfig c2 = sim_config(200000, 6);
  c2.randomized_mode = true;
  ArcoParams p = carryover_example();
  p.sigma_eps = 0.5;
  const auto y2 = simulate_dataset(p, PropensityParams::study_default(), c2).outcomes();
  CHECK(std::abs(mean(y2) / long_run_mean(p, 0.5) - 1.0) < 0.01);
}

TEST_CASE("simulation drops the burn-in and reindexes periods") {
  SimConfig c = sim_config(220, 1);
  const auto ds = simulate_dataset(ArcoParams::study_default(), PropensityParams::study_default(), c);
  CHECK(ds.size() == 220);
  CHECK(ds.burn_in_dropped == 2);
  CHECK(ds.periods.front().t == 1);
  CHECK(ds.periods.back().t == 220);
  for (const auto& p : ds.periods) CHECK((p.x == 0 || p.x == 1));
}

TEST_CASE("observed outcomes equal the potential outcome of the received exposure") {
  const auto tr = simulate_trace(ArcoParams::study_default(), PropensityParams::study_default(), sim_config(300, 2));
  for (std::size_t i = 0; i < tr.dataset.size(); ++i) {
    const auto& p = tr.dataset.periods[i];
    CHECK(p.y == (p.x == 1 ? tr.y1[i] : tr.y0[i]));
    // Both potential outcomes share the period's noise draw, so with no
    // interaction terms they differ by exactly bX.
    CHECK(tr.y1[i] - tr.y0[i] == doctest::Approx(1.1).epsilon(1e-12));
  }
}

TEST_CASE("identical seeds reproduce identical datasets") {
  const auto a = simulate_dataset(ArcoParams::study_default(), PropensityParams::study_default(), sim_config(220, 9));
  const auto b = simulate_dataset(ArcoParams::study_default(), PropensityParams::study_default(), sim_config(220, 9));
  const auto c = simulate_dataset(ArcoParams::study_default(), PropensityParams::study_default(), sim_config(220, 10));
  CHECK(a.outcomes() == b.outcomes());
  CHECK(a.exposures() == b.exposures());
  CHECK(a.outcomes() != c.outcomes());
}

TEST_CASE("noise-free lag-free outcomes take exactly two values") {
  const auto ds = simulate_dataset(lag_free(0.0), PropensityParams::study_default(), sim_config(100, 3));
  std::set<double> values;
  for (const auto& p : ds.periods) values.insert(p.y);
  CHECK(values == std::set<double>{1.0, 3.0});
}

TEST_CASE("endogenous assignment yields both exposure levels under the default reading") {
  const auto ds = simulate_dataset(ArcoParams::study_default(), PropensityParams::study_default(), sim_config(220, 4));
  const auto x = ds.exposures();
  const double share = static_cast<double>(std::count(x.begin(), x.end(), 1)) / x.size();
  CHECK(share > 0.3);
  CHECK(share < 0.75);
  CHECK(propensity_center(ArcoParams::study_default(), PropensityParams::study_default()) == doctest::Approx(12.75));
}

TEST_CASE("the literal uncentered reading exposes every analyzed period") {
  // logit = -0.25 + 1.25 * Y with Y near 13 saturates the propensity, so the
  // literal parameterization leaves no unexposed periods to compare against.
  const auto ds =
      simulate_dataset(ArcoParams::study_default(), PropensityParams::uncentered(), sim_config(220, 4));
  const auto x = ds.exposures();
  CHECK(std::count(x.begin(), x.end(), 1) == 220);
}

TEST_CASE("invalid simulation settings are rejected") {
  SimConfig c = sim_config(5, 1);
  CHECK_THROWS_AS(simulate_dataset(ArcoParams::study_default(), PropensityParams::study_default(), c), ConfigError);
  PropensityParams q = PropensityParams::study_default();
  q.pi1 = 1.0;
  CHECK_THROWS_AS(simulate_dataset(ArcoParams::study_default(), q, sim_config(50, 1)), ConfigError);
  ArcoParams p = ArcoParams::study_default();
  p.sigma_eps = -1.0;
  CHECK_THROWS_AS(simulate_dataset(p, PropensityParams::study_default(), sim_config(50, 1)), ConfigError);
  p = ArcoParams::study_default();
  p.beta_ex = {1.0};
  CHECK_THROWS_AS(simulate_dataset(p, PropensityParams::study_default(), sim_config(50, 1)), ConfigError);
}

TEST_CASE("exogenous series enter the outcome") {
  SimConfig c = sim_config(20, 8);
  c.exog_names = {"v"};
  for (int i = 0; i < 22; ++i) c.exog_rows.push_back({static_cast<double>(i % 3)});
  ArcoParams p = lag_free(0.0);
  p.beta_ex = {10.0};
  const auto ds = simulate_dataset(p, PropensityParams::study_default(), c);
  for (const auto& per : ds.periods) {
    CHECK(per.y == doctest::Approx(1.0 + 2.0 * per.x + 10.0 * per.exog[0]));
  }
}

}  // TEST_SUITE
