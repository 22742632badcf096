#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nof1/errors.hpp"
#include "nof1/models/fitted.hpp"
#include "nof1/models/forest.hpp"
#include "nof1/models/linear.hpp"
#include "nof1/models/logistic.hpp"
#include "nof1/rng.hpp"

using namespace nof1;

namespace {

Eigen::MatrixXd column(const std::vector<double>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return m;
}

Eigen::MatrixXd random_design(int n, int p, std::uint64_t key) {
  RandomStream s(key);
  Eigen::MatrixXd m(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) m(i, j) = s.normal();
  }
  return m;
}

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index i) {
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
  return r;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("least squares interpolates two points exactly") {
  const auto fit = fit_least_squares(column({1.0, 2.0}), std::vector<double>{3.0, 5.0}, {"w"}, true);
  CHECK(fit.coefficient("(Intercept)") == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.coefficient("w") == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(fit.resid_sd == 0.0);
  CHECK(fit.df_resid == 0);
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("least squares recovers a noise-free linear mechanism") {
  const Eigen::MatrixXd X = random_design(50, 3, 1);
  std::vector<double> y(50);
  for (int i = 0; i < 50; ++i) y[static_cast<std::size_t>(i)] = 0.5 + 1.0 * X(i, 0) - 2.0 * X(i, 1) + 3.0 * X(i, 2);
  const auto fit = fit_least_squares(X, y, {"a", "b", "c"}, true);
  CHECK(fit.coefficient("(Intercept)") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.coefficient("b") == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.predict(std::vector<double>{1, 1, 1}) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("least squares residuals are orthogonal to every design column") {
  const Eigen::MatrixXd X = random_design(80, 4, 2);
  RandomStream s(3);
  std::vector<double> y(80);
  for (auto& v : y) v = 10.0 + 5.0 * s.normal();
  const auto fit = fit_least_squares(X, y, {"a", "b", "c", "d"}, true);
  CHECK(std::abs(fit.residuals.sum()) < 1e-8 * 80 * 5);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(X.col(j).dot(fit.residuals)) < 1e-8 * 80 * 5);
}

TEST_CASE("least squares standard errors follow the textbook formula") {
  const Eigen::MatrixXd X = random_design(40, 2, 4);
  RandomStream s(5);
  std::vector<double> y(40);
  for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = 1.0 + X(i, 0) + s.normal();
  const auto fit = fit_least_squares(X, y, {"a", "b"}, true);
  Eigen::MatrixXd D(40, 3);
  D.col(0).setOnes();
  D.rightCols(2) = X;
  const Eigen::MatrixXd cov = (D.transpose() * D).inverse() * fit.resid_sd * fit.resid_sd;
  CHECK(fit.std_error("a") == doctest::Approx(std::sqrt(cov(1, 1))).epsilon(1e-10));
  const auto ci = fit.confidence_interval("a");
  CHECK(ci.hi - fit.coefficient("a") == doctest::Approx(t_critical(37) * fit.std_error("a")));
  CHECK(fit.df_resid == 37);
}

TEST_CASE("rank-deficient designs are rejected by name") {
  Eigen::MatrixXd X(5, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  try {
    fit_least_squares(X, std::vector<double>{1, 2, 3, 4, 6}, {"u", "v"}, true);
    FAIL("expected a rank error");
  } catch (const EstimatorError& e) {
    const std::string msg = e.what();
    CHECK((msg.find("u") != std::string::npos || msg.find("v") != std::string::npos));
  }
}

TEST_CASE("logistic regression reproduces the two-by-two log odds") {
  // w = 0: 10 ones and 30 zeros; w = 1: 30 ones and 10 zeros.
  std::vector<double> w;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    w.push_back(0.0);
    y.push_back(i < 10 ? 1 : 0);
  }
  for (int i = 0; i < 40; ++i) {
    w.push_back(1.0);
    y.push_back(i < 30 ? 1 : 0);
  }
  const auto fit = fit_logistic_irls(column(w), y, {"w"}, true);
  CHECK(std::abs(fit.coefficient("(Intercept)") - std::log(1.0 / 3.0)) < 1e-8);
  CHECK(std::abs(fit.coefficient("w") - std::log(9.0)) < 1e-8);
  CHECK(std::abs(fit.coefficient("(Intercept)") + 1.098612288668110) < 1e-8);
  CHECK(std::abs(fit.coefficient("w") - 2.197224577336219) < 1e-8);
  CHECK_FALSE(fit.separated);
  CHECK(fit.predict_prob(std::vector<double>{1.0}) == doctest::Approx(0.75));
}

TEST_CASE("logistic score equations vanish at convergence") {
  const Eigen::MatrixXd X = random_design(300, 2, 6);
  RandomStream s(7);
  std::vector<int> y(300);
  for (int i = 0; i < 300; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(0.3 + 0.8 * X(i, 0) - 0.5 * X(i, 1))));
    y[static_cast<std::size_t>(i)] = s.uniform() < p ? 1 : 0;
  }
  const auto fit = fit_logistic_irls(X, y, {"a", "b"}, true);
  Eigen::Vector3d score = Eigen::Vector3d::Zero();
  for (int i = 0; i < 300; ++i) {
    const double r = y[static_cast<std::size_t>(i)] - fit.predict_prob(row_of(X, i));
    score(0) += r;
    score(1) += r * X(i, 0);
    score(2) += r * X(i, 1);
  }
  CHECK(score.cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fit.iterations < 50);
}

TEST_CASE("logistic regression flags separation and rejects single-class data") {
  const auto sep = fit_logistic_irls(column({1, 2, 3, 4, 5, 6}), std::vector<int>{0, 0, 0, 1, 1, 1}, {"w"}, true);
  CHECK(sep.separated);
  CHECK_THROWS_AS(fit_logistic_irls(column({1, 2, 3}), std::vector<int>{1, 1, 1}, {"w"}, true),
                  EstimatorError);
}

TEST_CASE("forest defaults resolve by kind") {
  ForestConfig c;
  CHECK(c.resolved_mtry(ForestKind::regression, 2) == 1);
  CHECK(c.resolved_mtry(ForestKind::regression, 9) == 3);
  CHECK(c.resolved_mtry(ForestKind::classification, 2) == 2);
  CHECK(c.resolved_mtry(ForestKind::classification, 9) == 3);
  CHECK(c.resolved_min_node_size(ForestKind::regression) == 5);
  CHECK(c.resolved_min_node_size(ForestKind::classification) == 1);
  c.mtry = 5;
  CHECK_THROWS_AS(c.validate(2), ConfigError);
  c.mtry = 0;
  c.n_trees = 0;
  CHECK_THROWS_AS(c.validate(2), ConfigError);
}

TEST_CASE("a constant response gives a constant forest") {
  const Eigen::MatrixXd X = random_design(30, 2, 8);
  const std::vector<double> y(30, 3.0);
  ForestConfig c;
  c.n_trees = 20;
  const auto f = RandomForest::fit(X, y, ForestKind::regression, c);
  for (int i = 0; i < 10; ++i) CHECK(f.predict(row_of(random_design(1, 2, 100 + i), 0)) == 3.0);
}

TEST_CASE("a single stump splits between the two groups") {
  std::vector<double> v, y;
  for (int i = 0; i < 20; ++i) {
    v.push_back(i < 10 ? 0.05 * i : 0.55 + 0.04 * (i - 10));
    y.push_back(i < 10 ? 0.0 : 1.0);
  }
  ForestConfig c;
  c.n_trees = 1;
  c.max_depth = 1;
  c.bootstrap = false;
  const auto f = RandomForest::fit(column(v), y, ForestKind::regression, c);
  const auto& nodes = f.trees().front().nodes();
  REQUIRE(nodes.front().feature == 0);
  CHECK(nodes.front().threshold > 0.45);
  CHECK(nodes.front().threshold < 0.55);
  CHECK(f.trees().front().depth() == 1);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(f.predict(std::vector<double>{v[i]}) == y[i]);
}

TEST_CASE("classification forests separate separable data") {
  std::vector<double> v, y;
  for (int i = 0; i < 40; ++i) {
    v.push_back(i);
    y.push_back(i < 20 ? 0.0 : 1.0);
  }
  ForestConfig c;
  c.n_trees = 50;
  const auto f = RandomForest::fit(column(v), y, ForestKind::classification, c);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK((f.predict(std::vector<double>{v[i]}) > 0.5) == (y[i] == 1.0));
  }
}

TEST_CASE("classification forest probabilities stay in the unit interval") {
  const Eigen::MatrixXd X = random_design(100, 3, 9);
  RandomStream s(10);
  std::vector<double> y(100);
  for (auto& v : y) v = s.bernoulli(0.4) ? 1.0 : 0.0;
  ForestConfig c;
  c.n_trees = 30;
  const auto f = RandomForest::fit(X, y, ForestKind::classification, c);
  RandomStream q(11);
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> row{5.0 * q.normal(), 5.0 * q.normal(), 5.0 * q.normal()};
    const double p = f.predict(row);
    CHECK((p >= 0.0 && p <= 1.0));
  }
}

TEST_CASE("forests are reproducible and seed dependent") {
  const Eigen::MatrixXd X = random_design(60, 3, 12);
  RandomStream s(13);
  std::vector<double> y(60);
  for (int i = 0; i < 60; ++i) y[static_cast<std::size_t>(i)] = X(i, 0) + 0.3 * s.normal();
  ForestConfig c;
  c.n_trees = 25;
  const auto a = RandomForest::fit(X, y, ForestKind::regression, c);
  const auto b = RandomForest::fit(X, y, ForestKind::regression, c);
  c.seed = SeedSpec{99};
  const auto d = RandomForest::fit(X, y, ForestKind::regression, c);
  const auto probe = std::vector<double>{0.3, -0.2, 0.1};
  CHECK(a.predict(probe) == b.predict(probe));
  CHECK(a.predict(probe) != d.predict(probe));
}

TEST_CASE("row order does not matter once bootstrap counts follow their rows") {
  const Eigen::MatrixXd X = random_design(40, 2, 14);
  std::vector<double> y(40);
  for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = X(i, 0) * X(i, 1);
  ForestConfig c;
  c.n_trees = 10;
  const InBag bag = draw_inbag(40, c);
  std::vector<int> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  RandomStream(15).shuffle(std::span<int>(perm));
  Eigen::MatrixXd Xp(40, 2);
  std::vector<double> yp(40);
  InBag bagp(bag.size(), std::vector<int>(40));
  for (int i = 0; i < 40; ++i) {
    const auto src = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
    Xp.row(i) = X.row(static_cast<Eigen::Index>(src));
    yp[static_cast<std::size_t>(i)] = y[src];
    for (std::size_t b = 0; b < bag.size(); ++b) bagp[b][static_cast<std::size_t>(i)] = bag[b][src];
  }
  const auto f1 = RandomForest::fit(X, y, ForestKind::regression, c, bag);
  const auto f2 = RandomForest::fit(Xp, yp, ForestKind::regression, c, bagp);
  RandomStream q(16);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> row{q.normal(), q.normal()};
    CHECK(f1.predict(row) == doctest::Approx(f2.predict(row)).epsilon(1e-12));
  }
}

TEST_CASE("out-of-bag predictions use only trees that never saw the row") {
  const Eigen::MatrixXd X = random_design(30, 1, 17);
  std::vector<double> y(30);
  for (int i = 0; i < 30; ++i) y[static_cast<std::size_t>(i)] = X(i, 0);
  ForestConfig c;
  c.n_trees = 40;
  const auto f = RandomForest::fit(X, y, ForestKind::regression, c);
  const auto row = row_of(X, 3);
  double sum = 0.0;
  int used = 0;
  for (std::size_t b = 0; b < f.trees().size(); ++b) {
    if (f.inbag()[b][3] == 0) {
      sum += f.trees()[b].predict(row);
      ++used;
    }
  }
  REQUIRE(used > 0);
  CHECK(f.predict_oob(row, 3) == doctest::Approx(sum / used));

  c.bootstrap = false;
  const auto g = RandomForest::fit(X, y, ForestKind::regression, c);
  CHECK(g.predict_oob(row, 3) == g.predict(row));
}

TEST_CASE("fitted outcome models expose coefficients and residual scale") {
  const auto ds = make_dataset({1, 3, 2, 5, 4, 6, 5, 8}, {0, 1, 0, 1, 0, 1, 0, 1});
  const auto fm = assemble_features(ds, FeatureSpec::outcome_default());
  const auto lin = fit_linear_outcome(fm);
  CHECK(lin.kind() == FittedOutcomeModel::Kind::linear);
  CHECK(lin.coefficients().size() == 3);
  CHECK(lin.resid_sd() == doctest::Approx(lin.linear()->resid_sd));
  const auto s = lin.summary();
  CHECK(s["kind"] == "linear");
  CHECK(s["columns"].size() == 2);

  const auto known = FittedOutcomeModel::linear_from_coefficients(fm.layout, 2.0, {1.1, 0.8}, 0.0);
  CHECK(known.predict_mean(std::vector<double>{1.0, 10.0}) == doctest::Approx(11.1));

  ForestConfig c;
  c.n_trees = 10;
  const auto rf = fit_forest_outcome(fm, c);
  std::vector<double> resid;
  for (std::size_t i = 0; i < fm.rows(); ++i) resid.push_back(fm.y[i] - rf.predict_mean(fm.row(i)));
  CHECK(rf.resid_sd() == doctest::Approx(sample_sd(resid, 0)));
  CHECK(rf.coefficients().empty());
}

TEST_CASE("propensity models refuse the current exposure as a feature") {
  const auto ds = make_dataset({1, 3, 2, 5, 4, 6, 5, 8}, {0, 1, 0, 1, 0, 1, 0, 1});
  const auto fm = assemble_features(ds, FeatureSpec::outcome_default());
  CHECK_THROWS_AS(fit_forest_propensity(fm, ForestConfig{}), ConfigError);
  CHECK_THROWS_AS(fit_logistic_propensity(fm), ConfigError);
  const auto pm = assemble_features(make_dataset({1, 3, 2, 5, 4, 6, 5, 8}, {1, 1, 1, 1, 1, 1, 1, 1}),
                                    FeatureSpec::propensity_default());
  CHECK_THROWS_AS(fit_forest_propensity(pm, ForestConfig{}), EstimatorError);
}

}  // TEST_SUITE
