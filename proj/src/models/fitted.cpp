#include "nof1/models/fitted.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "nof1/errors.hpp"

namespace nof1 {

using nlohmann::json;

FittedOutcomeModel::FittedOutcomeModel(FeatureLayout layout, LinearFit fit)
    : layout_(std::move(layout)), impl_(std::move(fit)) {
  resid_sd_ = std::get<LinearFit>(impl_).resid_sd;
}

FittedOutcomeModel::FittedOutcomeModel(FeatureLayout layout, RandomForest forest, double resid_sd)
    : layout_(std::move(layout)), impl_(std::move(forest)), resid_sd_(resid_sd) {}

FittedOutcomeModel FittedOutcomeModel::linear_from_coefficients(FeatureLayout layout,
                                                                double intercept,
                                                                std::vector<double> slopes,
                                                                double resid_sd) {
  if (slopes.size() != layout.width()) {
    throw ConfigError("coefficient count does not match the feature layout");
  }
  if (resid_sd < 0.0) throw ConfigError("resid_sd must be non-negative");
  LinearFit fit;
  fit.has_intercept = true;
  fit.names.push_back("(Intercept)");
  for (const auto& n : layout.column_names()) fit.names.push_back(n);
  fit.coef.resize(static_cast<Eigen::Index>(slopes.size() + 1));
  fit.coef(0) = intercept;
  for (std::size_t j = 0; j < slopes.size(); ++j) fit.coef(static_cast<Eigen::Index>(j + 1)) = slopes[j];
  fit.resid_sd = resid_sd;
  return FittedOutcomeModel(std::move(layout), std::move(fit));
}

double FittedOutcomeModel::predict_mean(std::span<const double> row) const {
  return std::visit([&](const auto& m) { return m.predict(row); }, impl_);
}

FittedOutcomeModel FittedOutcomeModel::with_resid_sd(double sd) const {
  if (sd < 0.0) throw ConfigError("resid_sd must be non-negative");
  FittedOutcomeModel copy = *this;
  copy.resid_sd_ = sd;
  return copy;
}

std::vector<NamedCoefficient> FittedOutcomeModel::coefficients() const {
  std::vector<NamedCoefficient> out;
  if (const auto* lf = linear()) {
    for (std::size_t i = 0; i < lf->names.size(); ++i) {
      out.push_back({lf->names[i], lf->coef(static_cast<Eigen::Index>(i))});
    }
  }
  return out;
}

json to_json(const FeatureSpec& spec) {
  return json{{"include_current_exposure", spec.include_current_exposure},
              {"use_exposure_lag1", spec.use_exposure_lag1},
              {"outcome_lag", to_string(spec.outcome_lag)},
              {"exog", spec.exog_names}};
}

json to_json(const ForestConfig& cfg) {
  return json{{"n_trees", cfg.n_trees},
              {"mtry", cfg.mtry},
              {"min_node_size", cfg.min_node_size},
              {"max_depth", cfg.max_depth},
              {"bootstrap", cfg.bootstrap},
              {"seed", cfg.seed.base_seed}};
}

namespace {

json layout_json(const FeatureLayout& layout) {
  json j{{"feature_spec", to_json(layout.spec())}, {"columns", layout.column_names()}};
  if (const auto& q = layout.quartiles()) j["quartile_bounds"] = {q->q1, q->q2, q->q3};
  return j;
}

json coefficients_json(const std::vector<NamedCoefficient>& coefs) {
  json j = json::object();
  for (const auto& c : coefs) j[c.name] = c.value;
  return j;
}

}  // namespace

json FittedOutcomeModel::summary() const {
  json j = layout_json(layout_);
  j["kind"] = kind() == Kind::linear ? "linear" : "forest";
  j["resid_sd"] = resid_sd_;
  if (const auto* lf = linear()) {
    j["coefficients"] = coefficients_json(coefficients());
    j["df_resid"] = lf->df_resid;
  }
  if (const auto* f = forest()) {
    j["forest"] = to_json(f->config());
    j["forest"]["mtry_resolved"] = f->config().resolved_mtry(ForestKind::regression, f->n_features());
  }
  return j;
}

FittedPropensityModel::FittedPropensityModel(FeatureLayout layout, LogisticFit fit)
    : layout_(std::move(layout)), impl_(std::move(fit)) {}

FittedPropensityModel::FittedPropensityModel(FeatureLayout layout, RandomForest forest)
    : layout_(std::move(layout)), impl_(std::move(forest)) {}

double FittedPropensityModel::predict_prob(std::span<const double> row) const {
  const double p = std::visit(
      [&](const auto& m) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LogisticFit>) {
          return m.predict_prob(row);
        } else {
          return m.predict(row);
        }
      },
      impl_);
  return std::clamp(p, 0.0, 1.0);
}

double FittedPropensityModel::predict_prob_training(std::span<const double> row,
                                                    std::size_t training_row) const {
  if (const auto* f = forest()) return std::clamp(f->predict_oob(row, training_row), 0.0, 1.0);
  return predict_prob(row);
}

bool FittedPropensityModel::separation_warning() const {
  const auto* lf = logistic();
  return lf != nullptr && lf->separated;
}

std::vector<NamedCoefficient> FittedPropensityModel::coefficients() const {
  std::vector<NamedCoefficient> out;
  if (const auto* lf = logistic()) {
    for (std::size_t i = 0; i < lf->names.size(); ++i) {
      out.push_back({lf->names[i], lf->coef(static_cast<Eigen::Index>(i))});
    }
  }
  return out;
}

json FittedPropensityModel::summary() const {
  json j = layout_json(layout_);
  j["kind"] = kind() == Kind::logistic ? "logistic" : "forest";
  if (const auto* lf = logistic()) {
    j["coefficients"] = coefficients_json(coefficients());
    j["iterations"] = lf->iterations;
    j["separation_warning"] = lf->separated;
  } else {
    const auto& f = std::get<RandomForest>(impl_);
    j["forest"] = to_json(f.config());
    j["forest"]["mtry_resolved"] = f.config().resolved_mtry(ForestKind::classification, f.n_features());
  }
  return j;
}

FittedOutcomeModel fit_linear_outcome(const FeatureMatrix& fm, std::span<const double> y) {
  if (!fm.layout.spec().include_current_exposure) {
    throw ConfigError("outcome models must include the current exposure");
  }
  auto fit = fit_least_squares(fm.values, y, fm.layout.column_names(),
                               !fm.layout.spans_intercept());
  return FittedOutcomeModel(fm.layout, std::move(fit));
}

FittedOutcomeModel fit_linear_outcome(const FeatureMatrix& fm) { return fit_linear_outcome(fm, fm.y); }

FittedPropensityModel fit_logistic_propensity(const FeatureMatrix& fm, std::span<const int> x,
                                              const IrlsOptions& opts) {
  if (fm.layout.spec().include_current_exposure) {
    throw ConfigError("propensity models cannot use the current exposure as a feature");
  }
  auto fit = fit_logistic_irls(fm.values, x, fm.layout.column_names(),
                               !fm.layout.spans_intercept(), opts);
  return FittedPropensityModel(fm.layout, std::move(fit));
}

FittedPropensityModel fit_logistic_propensity(const FeatureMatrix& fm) {
  return fit_logistic_propensity(fm, fm.x);
}

FittedOutcomeModel fit_forest_outcome(const FeatureMatrix& fm, std::span<const double> y,
                                      const ForestConfig& cfg) {
  if (!fm.layout.spec().include_current_exposure) {
    throw ConfigError("outcome models must include the current exposure");
  }
  if (y.size() < 5) throw EstimatorError("forest outcome model needs at least 5 rows");
  auto forest = RandomForest::fit(fm.values, y, ForestKind::regression, cfg);
  std::vector<double> resid(y.size());
  std::vector<double> row(fm.layout.width());
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    resid[i] = y[i] - forest.predict(row);
  }
  double mu = 0.0;
  for (double r : resid) mu += r;
  mu /= static_cast<double>(resid.size());
  double ss = 0.0;
  for (double r : resid) ss += (r - mu) * (r - mu);
  const double sd = std::sqrt(ss / static_cast<double>(resid.size()));
  return FittedOutcomeModel(fm.layout, std::move(forest), sd);
}

FittedOutcomeModel fit_forest_outcome(const FeatureMatrix& fm, const ForestConfig& cfg) {
  return fit_forest_outcome(fm, fm.y, cfg);
}

FittedPropensityModel fit_forest_propensity(const FeatureMatrix& fm, std::span<const int> x,
                                            const ForestConfig& cfg) {
  if (fm.layout.spec().include_current_exposure) {
    throw ConfigError("propensity models cannot use the current exposure as a feature");
  }
  const long ones = std::count(x.begin(), x.end(), 1);
  if (ones == 0 || ones == static_cast<long>(x.size())) {
    throw EstimatorError("forest propensity model needs both exposure classes");
  }
  std::vector<double> xd(x.begin(), x.end());
  auto forest = RandomForest::fit(fm.values, xd, ForestKind::classification, cfg);
  return FittedPropensityModel(fm.layout, std::move(forest));
}

FittedPropensityModel fit_forest_propensity(const FeatureMatrix& fm, const ForestConfig& cfg) {
  return fit_forest_propensity(fm, fm.x, cfg);
}

}  // namespace nof1
