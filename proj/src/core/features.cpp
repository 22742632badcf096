#include "nof1/features.hpp"

#include "nof1/errors.hpp"
#include "nof1/stats.hpp"

namespace nof1 {

std::string to_string(OutcomeLag mode) {
  switch (mode) {
    case OutcomeLag::continuous_lag1: return "continuous";
    case OutcomeLag::quartile_lag1: return "quartile";
    case OutcomeLag::none: return "none";
  }
  return "none";
}

OutcomeLag outcome_lag_from_string(const std::string& s) {
  if (s == "continuous" || s == "continuous_lag1") return OutcomeLag::continuous_lag1;
  if (s == "quartile" || s == "quartile_lag1") return OutcomeLag::quartile_lag1;
  if (s == "none") return OutcomeLag::none;
  throw ConfigError("unknown outcome lag mode '" + s + "' (continuous|quartile|none)");
}

std::size_t FeatureSpec::width() const {
  std::size_t w = exog_names.size();
  if (include_current_exposure) ++w;
  if (use_exposure_lag1) ++w;
  if (outcome_lag == OutcomeLag::continuous_lag1) w += 1;
  if (outcome_lag == OutcomeLag::quartile_lag1) w += 4;
  return w;
}

FeatureSpec FeatureSpec::outcome_default() { return FeatureSpec{}; }

FeatureSpec FeatureSpec::propensity_default() {
  FeatureSpec s;
  s.include_current_exposure = false;
  return s;
}

int QuartileBounds::slot(double v) const {
  if (v <= q1) return 0;
  if (v <= q2) return 1;
  if (v <= q3) return 2;
  return 3;
}

FeatureLayout::FeatureLayout(FeatureSpec spec, const TimeSeriesDataset& ds)
    : spec_(std::move(spec)) {
  if (spec_.width() == 0) throw ConfigError("feature spec enables no features");
  for (const auto& name : spec_.exog_names) exog_cols_.push_back(ds.exog_index(name));
  if (spec_.outcome_lag == OutcomeLag::quartile_lag1) {
    const auto y = ds.outcomes();
    const auto q = order_statistic_quartiles(y);
    quartiles_ = QuartileBounds{q.q1, q.q2, q.q3};
  }
  if (spec_.include_current_exposure) names_.push_back("x");
  if (spec_.use_exposure_lag1) names_.push_back("x_lag1");
  if (spec_.outcome_lag == OutcomeLag::continuous_lag1) names_.push_back("y_lag1");
  if (spec_.outcome_lag == OutcomeLag::quartile_lag1) {
    for (const char* n : {"y_lag1_q1", "y_lag1_q2", "y_lag1_q3", "y_lag1_q4"}) names_.push_back(n);
  }
  for (const auto& n : spec_.exog_names) names_.push_back(n);
}

void FeatureLayout::encode(const FeatureInputs& in, std::span<double> out) const {
  std::size_t k = 0;
  if (spec_.include_current_exposure) out[k++] = in.x;
  if (spec_.use_exposure_lag1) out[k++] = in.x_lag;
  if (spec_.outcome_lag == OutcomeLag::continuous_lag1) out[k++] = in.y_lag;
  if (spec_.outcome_lag == OutcomeLag::quartile_lag1) {
    const int s = quartiles_->slot(in.y_lag);
    for (int j = 0; j < 4; ++j) out[k++] = (j == s) ? 1.0 : 0.0;
  }
  for (std::size_t c : exog_cols_) out[k++] = in.exog[c];
}

std::vector<double> FeatureLayout::encode(const FeatureInputs& in) const {
  std::vector<double> out(width());
  encode(in, out);
  return out;
}

std::vector<double> FeatureMatrix::row(std::size_t i) const {
  std::vector<double> out(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    out[static_cast<std::size_t>(j)] = values(static_cast<Eigen::Index>(i), j);
  }
  return out;
}

FeatureMatrix assemble_features(const TimeSeriesDataset& ds, const FeatureSpec& spec) {
  if (ds.size() < 3) {
    throw DataError("dataset too short for feature assembly: " + std::to_string(ds.size()) +
                    " periods (need at least 3)");
  }
  return assemble_features(ds, FeatureLayout(spec, ds));
}

FeatureMatrix assemble_features(const TimeSeriesDataset& ds, const FeatureLayout& layout) {
  ds.validate();
  FeatureMatrix fm;
  fm.layout = layout;
  if (ds.size() <= fm.layout.lag_depth()) {
    throw DataError("dataset too short: the feature layout needs more than " +
                    std::to_string(fm.layout.lag_depth()) + " period(s)");
  }
  fm.dropped_head = fm.layout.lag_depth();
  const std::size_t n = ds.size() - fm.dropped_head;
  fm.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(fm.layout.width()));
  std::vector<double> buf(fm.layout.width());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = i + fm.dropped_head;
    const auto& cur = ds.periods[idx];
    FeatureInputs in{static_cast<double>(cur.x), 0.0, 0.0, cur.exog};
    if (idx > 0) {
      in.x_lag = ds.periods[idx - 1].x;
      in.y_lag = ds.periods[idx - 1].y;
    }
    fm.layout.encode(in, buf);
    for (std::size_t j = 0; j < buf.size(); ++j) {
      fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j];
    }
    fm.periods.push_back(cur.t);
    fm.y.push_back(cur.y);
    fm.x.push_back(cur.x);
  }
  return fm;
}

}  // namespace nof1
