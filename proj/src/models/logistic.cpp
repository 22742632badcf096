#include "nof1/models/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nof1/errors.hpp"

namespace nof1 {

namespace {

double expit(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

}  // namespace

double LogisticFit::coefficient(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw EstimatorError("no coefficient named '" + name + "'");
  return coef(it - names.begin());
}

double LogisticFit::linear_predictor(std::span<const double> features) const {
  const Eigen::Index offset = has_intercept ? 1 : 0;
  double eta = has_intercept ? coef(0) : 0.0;
  for (std::size_t j = 0; j < features.size(); ++j) {
    eta += coef(static_cast<Eigen::Index>(j) + offset) * features[j];
  }
  return eta;
}

double LogisticFit::predict_prob(std::span<const double> features) const {
  return expit(linear_predictor(features));
}

LogisticFit fit_logistic_irls(const Eigen::MatrixXd& features, std::span<const int> y,
                              const std::vector<std::string>& names, bool add_intercept,
                              const IrlsOptions& opts) {
  if (static_cast<std::size_t>(features.cols()) != names.size()) {
    throw EstimatorError("feature names do not match the design width");
  }
  const Eigen::Index n = features.rows();
  if (static_cast<std::size_t>(n) != y.size()) {
    throw EstimatorError("response length does not match the design rows");
  }
  Eigen::MatrixXd X(n, features.cols() + (add_intercept ? 1 : 0));
  if (add_intercept) X.col(0).setOnes();
  X.rightCols(features.cols()) = features;
  const Eigen::Index p = X.cols();
  if (p == 0) throw EstimatorError("design matrix has no columns");
  if (n < p + 1) {
    throw EstimatorError("logistic regression needs more rows (" + std::to_string(n) +
                         ") than columns (" + std::to_string(p) + ")");
  }

  Eigen::VectorXd yv(n);
  long ones = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int v = y[static_cast<std::size_t>(i)];
    if (v != 0 && v != 1) throw EstimatorError("logistic response must be 0 or 1");
    yv(i) = v;
    ones += v;
  }
  if (ones == 0 || ones == n) {
    throw EstimatorError("logistic regression needs both exposure classes; all rows are " +
                         std::to_string(ones == 0 ? 0 : 1));
  }

  LogisticFit fit;
  fit.has_intercept = add_intercept;
  if (add_intercept) fit.names.push_back("(Intercept)");
  fit.names.insert(fit.names.end(), names.begin(), names.end());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(X);
  rank_check.setThreshold(1e-10);
  if (rank_check.rank() < p) {
    throw EstimatorError("rank-deficient propensity design (rank " +
                         std::to_string(rank_check.rank()) + " of " + std::to_string(p) + ")");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = X * beta;
  double ll = log_likelihood(eta, yv);
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    Eigen::VectorXd sw(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = expit(eta(i));
      const double w = std::max(pi * (1.0 - pi), 1e-12);
      sw(i) = std::sqrt(w);
      z(i) = eta(i) + (yv(i) - pi) / w;
    }
    const Eigen::MatrixXd Xw = sw.asDiagonal() * X;
    const Eigen::VectorXd zw = sw.cwiseProduct(z);
    Eigen::VectorXd proposal = Xw.householderQr().solve(zw);

    Eigen::VectorXd step = proposal - beta;
    Eigen::VectorXd eta_new = X * proposal;
    double ll_new = log_likelihood(eta_new, yv);
    for (int half = 0; half < 10 && ll_new < ll - 1e-12 * std::abs(ll); ++half) {
      step *= 0.5;
      proposal = beta + step;
      eta_new = X * proposal;
      ll_new = log_likelihood(eta_new, yv);
    }

    const double change = step.cwiseAbs().maxCoeff();
    fit.trace.push_back(change);
    beta = proposal;
    eta = eta_new;
    ll = ll_new;
    fit.iterations = iter;

    if (beta.cwiseAbs().maxCoeff() > opts.separation_bound) {
      fit.separated = true;
      fit.coef = beta;
      return fit;
    }
    if (change < opts.tolerance) {
      fit.coef = beta;
      return fit;
    }
  }

  std::ostringstream msg;
  msg << "IRLS did not converge in " << opts.max_iterations << " iterations; max |change| trace:";
  for (double c : fit.trace) msg << ' ' << c;
  throw EstimatorError(msg.str());
}

}  // namespace nof1
