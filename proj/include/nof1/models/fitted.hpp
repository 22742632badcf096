#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nof1/features.hpp"
#include "nof1/models/forest.hpp"
#include "nof1/models/linear.hpp"
#include "nof1/models/logistic.hpp"

namespace nof1 {

struct NamedCoefficient {
  std::string name;
  double value;
};

/// An outcome model twin: predicts E(Y_t | X_t, W_t) from an encoded row of
/// its FeatureLayout, and carries the residual scale used to add noise.
class FittedOutcomeModel {
 public:
  enum class Kind { linear, forest };

  FittedOutcomeModel(FeatureLayout layout, LinearFit fit);
  FittedOutcomeModel(FeatureLayout layout, RandomForest forest, double resid_sd);

  /// A linear model with given coefficients instead of fitted ones, e.g. a
  /// known mechanism. `slopes` align with layout.column_names().
  static FittedOutcomeModel linear_from_coefficients(FeatureLayout layout, double intercept,
                                                     std::vector<double> slopes,
                                                     double resid_sd);

  Kind kind() const { return std::holds_alternative<LinearFit>(impl_) ? Kind::linear : Kind::forest; }
  double predict_mean(std::span<const double> row) const;
  double resid_sd() const { return resid_sd_; }
  FittedOutcomeModel with_resid_sd(double sd) const;
  const FeatureLayout& layout() const { return layout_; }
  const LinearFit* linear() const { return std::get_if<LinearFit>(&impl_); }
  const RandomForest* forest() const { return std::get_if<RandomForest>(&impl_); }
  std::vector<NamedCoefficient> coefficients() const;  // empty for forests

  nlohmann::json summary() const;

 private:
  FeatureLayout layout_;
  std::variant<LinearFit, RandomForest> impl_;
  double resid_sd_ = 0.0;
};

/// A propensity score twin: Pr(X_t = 1 | W_t) in [0, 1].
class FittedPropensityModel {
 public:
  enum class Kind { logistic, forest };

  FittedPropensityModel(FeatureLayout layout, LogisticFit fit);
  FittedPropensityModel(FeatureLayout layout, RandomForest forest);

  Kind kind() const { return std::holds_alternative<LogisticFit>(impl_) ? Kind::logistic : Kind::forest; }
  double predict_prob(std::span<const double> row) const;
  /// Score for row `training_row` of the training matrix: out-of-bag for
  /// forests, identical to predict_prob for logistic fits.
  double predict_prob_training(std::span<const double> row, std::size_t training_row) const;
  const FeatureLayout& layout() const { return layout_; }
  const RandomForest* forest() const { return std::get_if<RandomForest>(&impl_); }
  const LogisticFit* logistic() const { return std::get_if<LogisticFit>(&impl_); }
  bool separation_warning() const;
  std::vector<NamedCoefficient> coefficients() const;

  nlohmann::json summary() const;

 private:
  FeatureLayout layout_;
  std::variant<LogisticFit, RandomForest> impl_;
};

FittedOutcomeModel fit_linear_outcome(const FeatureMatrix& fm, std::span<const double> y);
FittedOutcomeModel fit_linear_outcome(const FeatureMatrix& fm);

FittedPropensityModel fit_logistic_propensity(const FeatureMatrix& fm, std::span<const int> x,
                                              const IrlsOptions& opts = {});
FittedPropensityModel fit_logistic_propensity(const FeatureMatrix& fm);

/// In-sample residual SD uses denominator n.
FittedOutcomeModel fit_forest_outcome(const FeatureMatrix& fm, std::span<const double> y,
                                      const ForestConfig& cfg);
FittedOutcomeModel fit_forest_outcome(const FeatureMatrix& fm, const ForestConfig& cfg);

FittedPropensityModel fit_forest_propensity(const FeatureMatrix& fm, std::span<const int> x,
                                            const ForestConfig& cfg);
FittedPropensityModel fit_forest_propensity(const FeatureMatrix& fm, const ForestConfig& cfg);

nlohmann::json to_json(const FeatureSpec& spec);
nlohmann::json to_json(const ForestConfig& cfg);

}  // namespace nof1
