#include "nof1/models/linear.hpp"

#include <algorithm>
#include <cmath>

#include "nof1/errors.hpp"

namespace nof1 {

namespace {

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& features, bool add_intercept) {
  if (!add_intercept) return features;
  Eigen::MatrixXd d(features.rows(), features.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(features.cols()) = features;
  return d;
}

}  // namespace

std::size_t LinearFit::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw EstimatorError("no coefficient named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

double LinearFit::std_error(const std::string& name) const {
  const auto i = static_cast<Eigen::Index>(index_of(name));
  return std::sqrt(covariance(i, i));
}

Interval LinearFit::confidence_interval(const std::string& name, double level) const {
  const double b = coefficient(name);
  if (df_resid <= 0) return {b, b};
  const double half = t_critical(static_cast<double>(df_resid), level) * std_error(name);
  return {b - half, b + half};
}

double LinearFit::predict(std::span<const double> features) const {
  const std::size_t offset = has_intercept ? 1 : 0;
  double mu = has_intercept ? coef(0) : 0.0;
  for (std::size_t j = 0; j < features.size(); ++j) {
    mu += coef(static_cast<Eigen::Index>(j + offset)) * features[j];
  }
  return mu;
}

LinearFit fit_least_squares(const Eigen::MatrixXd& features, std::span<const double> y,
                            const std::vector<std::string>& names, bool add_intercept) {
  if (static_cast<std::size_t>(features.cols()) != names.size()) {
    throw EstimatorError("feature names do not match the design width");
  }
  if (static_cast<std::size_t>(features.rows()) != y.size()) {
    throw EstimatorError("response length does not match the design rows");
  }
  const Eigen::MatrixXd X = design_matrix(features, add_intercept);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (p == 0) throw EstimatorError("design matrix has no columns");
  if (n < p) {
    throw EstimatorError("least squares needs at least as many rows (" + std::to_string(n) +
                         ") as columns (" + std::to_string(p) + ")");
  }

  LinearFit fit;
  fit.has_intercept = add_intercept;
  if (add_intercept) fit.names.push_back("(Intercept)");
  fit.names.insert(fit.names.end(), names.begin(), names.end());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    // Pivots past the rank are the columns explained by the earlier ones.
    std::string which;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      if (!which.empty()) which += ", ";
      which += fit.names[static_cast<std::size_t>(perm(k))];
    }
    throw EstimatorError("rank-deficient design (rank " + std::to_string(qr.rank()) + " of " +
                         std::to_string(p) + "); collinear column(s): " + which);
  }

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  // A full-rank square design is an interpolation problem; solve it directly.
  fit.coef = n == p ? Eigen::VectorXd(X.partialPivLu().solve(yv))
                    : Eigen::VectorXd(qr.solve(yv));
  fit.residuals = yv - X * fit.coef;
  fit.df_resid = static_cast<long>(n - p);
  const double rss = fit.residuals.squaredNorm();
  fit.resid_sd = fit.df_resid > 0 ? std::sqrt(rss / static_cast<double>(fit.df_resid)) : 0.0;

  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  const auto P = qr.colsPermutation();
  fit.covariance = (P * inner * P.transpose()) * (fit.resid_sd * fit.resid_sd);
  return fit;
}

}  // namespace nof1
