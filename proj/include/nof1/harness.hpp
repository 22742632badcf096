#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nof1/arco.hpp"
#include "nof1/config.hpp"
#include "nof1/features.hpp"
#include "nof1/models/fitted.hpp"
#include "nof1/motr.hpp"
#include "nof1/pstn.hpp"
#include "nof1/stats.hpp"

namespace nof1 {

enum class MethodId { raw, coef, motr_glm, pstn_glm, motr_rf, pstn_rf };

inline constexpr std::array<MethodId, 6> all_methods{MethodId::raw,      MethodId::coef,
                                                     MethodId::motr_glm, MethodId::pstn_glm,
                                                     MethodId::motr_rf,  MethodId::pstn_rf};

std::string to_string(MethodId m);  // "raw", "coef", "motr_glm", ...
/// Accepts both "motr_glm" and "motr-glm" spellings.
MethodId method_from_string(const std::string& s);

struct PointEstimate {
  double estimate = 0.0;
  Interval ci;
  bool ci_degenerate = false;
};

/// Difference of observed arm means with a Welch t interval.
PointEstimate estimate_raw(const TimeSeriesDataset& ds);

/// Exposure coefficient of the OLS fit Y_t ~ 1 + X_t + Y_{t-1}, with its t
/// interval.
PointEstimate estimate_coef(const TimeSeriesDataset& ds);

/// Model and estimator settings shared by every method. Seeds inside `motr`
/// and the forest configs are replaced per application by apply_method.
/// Propensity forests are probability forests: their leaves must hold at
/// least 10 periods so that averaged class shares are not driven to 0 or 1.
struct MethodSettings {
  FeatureSpec outcome = FeatureSpec::outcome_default();
  FeatureSpec propensity = FeatureSpec::propensity_default();
  MotrConfig motr{};
  PstnConfig pstn{};
  ForestConfig forest = default_forest();
  ForestConfig propensity_forest = default_propensity_forest();
  IrlsOptions irls{};

  static ForestConfig default_forest() {
    ForestConfig f;
    f.n_trees = 100;
    return f;
  }
  static ForestConfig default_propensity_forest() {
    ForestConfig f = default_forest();
    f.min_node_size = 10;
    return f;
  }
};

struct MethodResult {
  MethodId method = MethodId::raw;
  double estimate = 0.0;
  Interval ci;
  bool has_ci = false;
};

/// Runs one estimator on one dataset. `seed` is the method's own seed space:
/// MoTR draws from seed.child("motr") and forests from seed.child("forest").
MethodResult apply_method(MethodId method, const TimeSeriesDataset& ds,
                          const MethodSettings& settings, const SeedSpec& seed);

struct StudyConfig {
  int datasets = 100;  // H
  ArcoParams params = ArcoParams::study_default();
  PropensityParams propensity = PropensityParams::study_default();
  SimConfig sim{};     // its seed is replaced per dataset
  std::vector<MethodId> methods{all_methods.begin(), all_methods.end()};
  MethodSettings settings{};
  SeedSpec seed{};
  /// Effect the biases are measured against; the exposure coefficient bX
  /// unless set.
  std::optional<double> true_apte;
  int workers = 1;

  void validate() const;
  double resolved_true_apte() const { return true_apte.value_or(params.betaX); }
};

struct ReplicationRow {
  int h = 0;
  MethodId method = MethodId::raw;
  double estimate = 0.0;
  double bias = 0.0;
  bool failed = false;
  std::string error;
};

struct MethodSummary {
  MethodId method = MethodId::raw;
  double mean_bias = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int n = 0;
  int failures = 0;
};

struct ReplicationReport {
  double true_apte = 0.0;
  std::vector<ReplicationRow> rows;       // sorted by (h, method)
  std::vector<MethodSummary> summary;     // in StudyConfig::methods order
  const MethodSummary& of(MethodId m) const;
};

/// Dataset h (1-based) is simulated with seed.child("dataset", h); method k
/// of the study list runs with seed.child("method", h, index of the method in
/// all_methods). Estimator failures become flagged rows.
ReplicationReport replicate(const StudyConfig& study);

/// Summary of a set of biases: mean +- 1.96 * sd / sqrt(n).
MethodSummary summarize_biases(MethodId method, const std::vector<double>& biases, int failures);

void write_rows_csv(std::ostream& out, const ReplicationReport& report, const ResolvedConfig& echo);
void write_summary_csv(std::ostream& out, const ReplicationReport& report, const ResolvedConfig& echo);

}  // namespace nof1
