#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nof1/dataset.hpp"

namespace nof1 {

enum class OutcomeLag { continuous_lag1, quartile_lag1, none };

std::string to_string(OutcomeLag mode);
OutcomeLag outcome_lag_from_string(const std::string& s);

/// Which per-period predictors a model sees. Column order is fixed:
/// x_t, x_{t-1}, y_{t-1} (or its four quartile indicators), exogenous columns.
struct FeatureSpec {
  bool include_current_exposure = true;
  bool use_exposure_lag1 = false;
  OutcomeLag outcome_lag = OutcomeLag::continuous_lag1;
  std::vector<std::string> exog_names;

  bool uses_lags() const { return use_exposure_lag1 || outcome_lag != OutcomeLag::none; }
  std::size_t width() const;

  /// X_t ~ (X_t, Y_{t-1}): the outcome model of the simulation study.
  static FeatureSpec outcome_default();
  /// X_t ~ Y_{t-1}: the propensity model of the simulation study.
  static FeatureSpec propensity_default();
};

/// Quartile slot boundaries; values equal to a boundary fall in the lower slot.
struct QuartileBounds {
  double q1 = 0.0, q2 = 0.0, q3 = 0.0;
  int slot(double v) const;  // 0..3
};

/// Raw per-period inputs before encoding.
struct FeatureInputs {
  double x = 0.0;
  double x_lag = 0.0;
  double y_lag = 0.0;
  std::span<const double> exog;  // full dataset exog row
};

/// A spec bound to a dataset: resolved exog column indices and, for quartile
/// encoding, the boundaries computed from every observed outcome. Models carry
/// their layout so simulated rollouts encode generated values identically.
class FeatureLayout {
 public:
  FeatureLayout() = default;
  FeatureLayout(FeatureSpec spec, const TimeSeriesDataset& ds);

  const FeatureSpec& spec() const { return spec_; }
  const std::optional<QuartileBounds>& quartiles() const { return quartiles_; }
  const std::vector<std::string>& column_names() const { return names_; }
  std::size_t width() const { return names_.size(); }
  /// Leading periods without the lags this layout needs.
  std::size_t lag_depth() const { return spec_.uses_lags() ? 1 : 0; }
  /// The four quartile indicators sum to one, so a linear model must not add
  /// its own intercept.
  bool spans_intercept() const { return spec_.outcome_lag == OutcomeLag::quartile_lag1; }

  void encode(const FeatureInputs& in, std::span<double> out) const;
  std::vector<double> encode(const FeatureInputs& in) const;

 private:
  FeatureSpec spec_;
  std::optional<QuartileBounds> quartiles_;
  std::vector<std::size_t> exog_cols_;
  std::vector<std::string> names_;
};

/// Model-ready rows for periods t = 1 + dropped_head .. m, with aligned
/// responses.
struct FeatureMatrix {
  FeatureLayout layout;
  Eigen::MatrixXd values;     // rows x layout.width()
  std::vector<int> periods;   // t of each row
  std::vector<double> y;      // observed outcome at each row's period
  std::vector<int> x;         // observed exposure at each row's period
  std::size_t dropped_head = 0;

  std::size_t rows() const { return periods.size(); }
  std::vector<double> row(std::size_t i) const;
};

FeatureMatrix assemble_features(const TimeSeriesDataset& ds, const FeatureSpec& spec);
/// Rows for an already-bound layout (e.g. the one a fitted model carries).
FeatureMatrix assemble_features(const TimeSeriesDataset& ds, const FeatureLayout& layout);

}  // namespace nof1
