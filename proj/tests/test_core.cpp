#include <doctest.h>

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "nof1/config.hpp"
#include "nof1/dataset.hpp"
#include "nof1/errors.hpp"
#include "nof1/features.hpp"
#include "nof1/rng.hpp"
#include "nof1/stats.hpp"

using namespace nof1;

namespace {

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("random stream draws are a pure function of key and position") {
  RandomStream a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
  CHECK(a.position() == 100);
}

TEST_CASE("uniform draws stay inside the open unit interval") {
  RandomStream s(7);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal draws have unit scale") {
  RandomStream s(11);
  std::vector<double> v(200000);
  for (auto& x : v) x = s.normal();
  CHECK(std::abs(mean(v)) < 0.01);
  CHECK(sample_sd(v) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("bounded integers cover the range without bias") {
  RandomStream s(3);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[s.below(6)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
}

TEST_CASE("shuffle is a permutation and depends on the key") {
  std::vector<int> base(20);
  std::iota(base.begin(), base.end(), 0);
  auto a = base, b = base, c = base;
  RandomStream(5).shuffle(std::span<int>(a));
  RandomStream(5).shuffle(std::span<int>(b));
  RandomStream(6).shuffle(std::span<int>(c));
  CHECK(a == b);
  CHECK(a != c);
  std::sort(a.begin(), a.end());
  CHECK(a == base);
}

TEST_CASE("seed labels and indices select distinct streams") {
  SeedSpec s{1};
  std::set<std::uint64_t> keys{s.key("a"), s.key("b"), s.key("a", 1), s.key("a", 0, 1),
                               SeedSpec{2}.key("a")};
  CHECK(keys.size() == 5);
  CHECK(s.key("a", 3) == SeedSpec{1}.key("a", 3));
  CHECK(s.child("x", 1).base_seed == s.key("x", 1));
}

TEST_CASE("basic descriptive statistics") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(mean(v) == 5.0);
  CHECK(sample_sd(v, 0) == doctest::Approx(2.0));
  CHECK(sample_sd(v) == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(median(v) == 4.5);
  CHECK(median(std::vector<double>{3, 1, 2}) == 2.0);
  CHECK_THROWS_AS(mean(std::vector<double>{}), DataError);
  CHECK_THROWS_AS(sample_sd(std::vector<double>{1.0}), DataError);
}

TEST_CASE("quartiles are medians of the lower and upper halves") {
  const std::vector<double> y{5, 1, 7, 3, 9, 2, 8, 4};
  const auto q = order_statistic_quartiles(y);
  CHECK(q.q1 == 2.5);
  CHECK(q.q2 == 4.5);
  CHECK(q.q3 == 7.5);
  // Odd n: the middle order statistic belongs to neither half.
  const auto r = order_statistic_quartiles(std::vector<double>{1, 2, 3, 4, 5, 6, 7});
  CHECK(r.q1 == 2.0);
  CHECK(r.q2 == 4.0);
  CHECK(r.q3 == 6.0);
}

TEST_CASE("t critical values match tabulated quantiles") {
  CHECK(t_critical(10) == doctest::Approx(2.2281388520).epsilon(1e-9));
  CHECK(t_critical(1) == doctest::Approx(12.7062047362).epsilon(1e-9));
  CHECK(t_critical(1e9) == doctest::Approx(1.9599639845).epsilon(1e-7));
  CHECK(t_critical(5, 0.90) == doctest::Approx(2.0150483733).epsilon(1e-9));
}

TEST_CASE("Welch interval matches a hand computation") {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{2, 4, 6};
  const auto w = welch_interval(a, b);
  const double va = 5.0 / 3.0 / 4.0, vb = 4.0 / 3.0;
  const double se = std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) / (va * va / 3.0 + vb * vb / 2.0);
  CHECK_FALSE(w.degenerate);
  CHECK(w.difference == doctest::Approx(-1.5));
  CHECK(w.df == doctest::Approx(df));
  CHECK(w.ci.lo == doctest::Approx(-1.5 - t_critical(df) * se));
  CHECK(w.ci.hi == doctest::Approx(-1.5 + t_critical(df) * se));
}

TEST_CASE("Welch interval is degenerate without spread or with singleton arms") {
  CHECK(welch_interval(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}).degenerate);
  CHECK(welch_interval(std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 2.0}).degenerate);
}

TEST_CASE("pairwise summation agrees with naive summation on small sums") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 500500.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("datasets are validated") {
  auto ds = make_dataset({1, 2, 3}, {0, 1, 0});
  CHECK(ds.size() == 3);
  CHECK(ds.periods[2].t == 3);
  CHECK(ds.outcomes() == std::vector<double>{1, 2, 3});
  CHECK(ds.exposures() == std::vector<int>{0, 1, 0});
  ds.periods[1].x = 2;
  CHECK_THROWS_AS(ds.validate(), DataError);
  ds.periods[1].x = 1;
  ds.periods[2].t = 5;
  CHECK_THROWS_AS(ds.validate(), DataError);
  CHECK_THROWS_AS(make_dataset({1, 2}, {0}), DataError);
}

TEST_CASE("median split of a continuous exposure") {
  RandomStream s(99);
  std::vector<double> v(222);
  for (auto& x : v) x = s.normal();
  const auto d = dichotomize_exposure(v);
  const long ones = std::count(d.binary.begin(), d.binary.end(), 1);
  CHECK((ones == 110 || ones == 111));
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(d.binary[i] == (v[i] > d.threshold ? 1 : 0));

  const auto small = dichotomize_exposure({3, 1, 2, 4});
  CHECK(small.threshold == 2.5);
  CHECK(small.binary == std::vector<int>{1, 0, 0, 1});

  const auto msg = error_text([] { dichotomize_exposure({2.5, 2.5, 2.5}); });
  CHECK(msg.find("2.5") != std::string::npos);
}

TEST_CASE("log10 outcome transform") {
  const auto t = log10_transform({7.1, 100.0});
  CHECK(t[0] == doctest::Approx(0.851258348719075).epsilon(1e-14));
  CHECK(t[1] == 2.0);
  const auto msg = error_text([] { log10_transform({1.0, 3.0, 0.0}); });
  CHECK(msg.find("index 2") != std::string::npos);
}

TEST_CASE("CSV round trip preserves every value") {
  TimeSeriesDataset ds = make_dataset({0.1, 1.0 / 3.0, -2.5e-8, 12.75}, {1, 0, 0, 1});
  ds.exog_names = {"temp"};
  for (auto& p : ds.periods) p.exog = {p.y * 2.0 + 0.3};
  std::stringstream ss;
  write_dataset_csv(ss, ds);
  const auto back = read_dataset_csv(ss);
  REQUIRE(back.size() == ds.size());
  CHECK(back.exog_names == ds.exog_names);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.periods[i].y == ds.periods[i].y);
    CHECK(back.periods[i].x == ds.periods[i].x);
    CHECK(back.periods[i].exog == ds.periods[i].exog);
  }
}

TEST_CASE("CSV reader skips comments and applies transforms") {
  std::istringstream in("# produced elsewhere\nt,y,x\n1,10,0.2\n# mid comment\n2,100,0.9\n3,1000,0.5\n");
  CsvReadOptions opts;
  opts.dichotomize = true;
  opts.log10_outcome = true;
  const auto ds = read_dataset_csv(in, opts);
  CHECK(ds.outcomes() == std::vector<double>{1, 2, 3});
  CHECK(ds.exposures() == std::vector<int>{0, 1, 0});
}

TEST_CASE("CSV errors name the offending line") {
  auto msg_of = [](const std::string& text) {
    return error_text([&] {
      std::istringstream in(text);
      read_dataset_csv(in);
    });
  };
  CHECK(msg_of("t,y,x\n1,2,0\n2,abc,1\n").find("line 3") != std::string::npos);
  CHECK(msg_of("t,y,x\n1,2,0\n3,2,1\n").find("line 3") != std::string::npos);
  CHECK(msg_of("a,b,c\n1,2,0\n").find("line 1") != std::string::npos);
  CHECK(msg_of("t,y,x\n1,2,0\n2,2\n").find("line 3") != std::string::npos);
  CHECK(msg_of("t,y,x\n1,2,0\n2,2,3\n").find("line 3") != std::string::npos);
  CHECK_THROWS_AS(read_dataset_csv(std::string("/nonexistent/file.csv")), DataError);
}

TEST_CASE("key=value configuration") {
  std::istringstream in("# comment\nalpha = 1.5\nname=x\n\nlist = 1, 2,3\nflag=yes\n");
  auto cfg = KeyValueConfig::parse(in);
  CHECK(cfg.get_double("alpha", 0) == 1.5);
  CHECK(cfg.get_string("name", "") == "x");
  CHECK(cfg.get_doubles("list") == std::vector<double>{1, 2, 3});
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_int("missing", 7) == 7);
  cfg.set_assignment("alpha=2");
  CHECK(cfg.get_double("alpha", 0) == 2.0);
  CHECK_THROWS_AS(cfg.set_assignment("noequals"), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("alpha", 0) + cfg.get_int("name", 0), ConfigError);
  CHECK_THROWS_AS(cfg.require_known({"alpha", "name", "list"}), ConfigError);
  CHECK_NOTHROW(cfg.require_known({"alpha", "name", "list", "flag"}));

  std::istringstream bad("ok=1\njunk line\n");
  const auto msg = error_text([&] { KeyValueConfig::parse(bad, "f.cfg"); });
  CHECK(msg.find("f.cfg:2") != std::string::npos);
}

TEST_CASE("resolved configuration echoes as comments") {
  ResolvedConfig r;
  r.add("a", std::string("x"));
  r.add("b", 0.5);
  r.add("c", 3L);
  r.add("d", true);
  std::ostringstream out;
  r.write_comments(out);
  CHECK(out.str() == "# a=x\n# b=0.5\n# c=3\n# d=true\n");
}

TEST_CASE("feature layout of the simulation-study models") {
  const auto ds = make_dataset({1, 2, 3, 4}, {0, 1, 1, 0});
  const auto fm = assemble_features(ds, FeatureSpec::outcome_default());
  CHECK(fm.layout.column_names() == std::vector<std::string>{"x", "y_lag1"});
  CHECK(fm.dropped_head == 1);
  CHECK(fm.periods == std::vector<int>{2, 3, 4});
  CHECK(fm.row(0) == std::vector<double>{1, 1});
  CHECK(fm.row(2) == std::vector<double>{0, 3});

  const auto pm = assemble_features(ds, FeatureSpec::propensity_default());
  CHECK(pm.layout.column_names() == std::vector<std::string>{"y_lag1"});

  FeatureSpec lagged;
  lagged.use_exposure_lag1 = true;
  const auto lm = assemble_features(ds, lagged);
  CHECK(lm.layout.column_names() == std::vector<std::string>{"x", "x_lag1", "y_lag1"});
  CHECK(lm.row(1) == std::vector<double>{1, 1, 2});

  FeatureSpec nolag;
  nolag.outcome_lag = OutcomeLag::none;
  const auto nm = assemble_features(ds, nolag);
  CHECK(nm.dropped_head == 0);
  CHECK(nm.rows() == 4);

  CHECK_THROWS_AS(assemble_features(make_dataset({1, 2}, {0, 1}), FeatureSpec{}), DataError);
  CHECK_THROWS_AS(outcome_lag_from_string("cubic"), ConfigError);
}

TEST_CASE("quartile encoding agrees with a rank-based assignment") {
  const std::vector<double> y{5, 1, 7, 3, 9, 2, 8, 4};
  const auto ds = make_dataset(y, {0, 1, 0, 1, 0, 1, 0, 1});
  FeatureSpec spec;
  spec.outcome_lag = OutcomeLag::quartile_lag1;
  const auto fm = assemble_features(ds, spec);
  CHECK(fm.layout.spans_intercept());
  // With 8 distinct values each quartile holds exactly two of them: rank
  // 0-1 -> q1, 2-3 -> q2, ...
  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    const double lag = y[i];
    const auto rank = std::lower_bound(sorted.begin(), sorted.end(), lag) - sorted.begin();
    const auto row = fm.row(i);
    for (int q = 0; q < 4; ++q) {
      CHECK(row[1 + static_cast<std::size_t>(q)] == (q == rank / 2 ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("exogenous columns are appended by name") {
  auto ds = make_dataset({1, 2, 3}, {0, 1, 0});
  ds.exog_names = {"a", "b"};
  for (auto& p : ds.periods) p.exog = {10.0 * p.t, 100.0 * p.t};
  FeatureSpec spec;
  spec.exog_names = {"b"};
  const auto fm = assemble_features(ds, spec);
  CHECK(fm.layout.column_names().back() == "b");
  CHECK(fm.row(0) == std::vector<double>{1, 1, 200});
  spec.exog_names = {"missing"};
  CHECK_THROWS_AS(assemble_features(ds, spec), DataError);
}

}  // TEST_SUITE
