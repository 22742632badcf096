#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nof1/stats.hpp"

namespace nof1 {

/// Ordinary least squares solved by column-pivoted Householder QR.
struct LinearFit {
  std::vector<std::string> names;  // "(Intercept)" first when present
  Eigen::VectorXd coef;
  Eigen::MatrixXd covariance;      // resid_sd^2 (X'X)^{-1}
  Eigen::VectorXd residuals;
  double resid_sd = 0.0;           // sqrt(RSS / (n - p)); 0 for an exact fit
  long df_resid = 0;
  bool has_intercept = false;

  std::size_t index_of(const std::string& name) const;
  double coefficient(const std::string& name) const { return coef(static_cast<Eigen::Index>(index_of(name))); }
  double std_error(const std::string& name) const;
  /// t-based interval on df_resid degrees of freedom.
  Interval confidence_interval(const std::string& name, double level = 0.95) const;

  /// Feature row excludes the intercept column.
  double predict(std::span<const double> features) const;
};

/// Throws EstimatorError when the design is rank deficient, naming the
/// columns that are linear combinations of the others.
LinearFit fit_least_squares(const Eigen::MatrixXd& features, std::span<const double> y,
                            const std::vector<std::string>& names, bool add_intercept);

}  // namespace nof1
