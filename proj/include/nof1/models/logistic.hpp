#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nof1 {

struct IrlsOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;         // max |coefficient change|
  double separation_bound = 30.0;   // |coefficient| on the logit scale
};

struct LogisticFit {
  std::vector<std::string> names;   // "(Intercept)" first when present
  Eigen::VectorXd coef;
  bool has_intercept = false;
  int iterations = 0;
  bool separated = false;           // a coefficient crossed the separation bound
  std::vector<double> trace;        // max |change| per iteration

  double coefficient(const std::string& name) const;
  double linear_predictor(std::span<const double> features) const;
  double predict_prob(std::span<const double> features) const;
};

/// Bernoulli maximum likelihood by iteratively reweighted least squares.
/// Each step solves the weighted least-squares problem by QR; a step that
/// lowers the log-likelihood is halved up to ten times.
LogisticFit fit_logistic_irls(const Eigen::MatrixXd& features, std::span<const int> y,
                              const std::vector<std::string>& names, bool add_intercept,
                              const IrlsOptions& opts = {});

}  // namespace nof1
