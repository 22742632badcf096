#pragma once

#include <span>
#include <vector>

#include "nof1/dataset.hpp"
#include "nof1/models/fitted.hpp"
#include "nof1/stats.hpp"

namespace nof1 {

/// Propensity-score-twin settings.
///  - trimming keeps periods with trim_lo < pi-hat < trim_hi;
///  - overlap keeps trimmed periods whose pi-hat lies in the intersection of
///    the two arms' [min, max] pi-hat ranges;
///  - stabilization multiplies each weight by the retained share of the
///    period's observed arm.
struct PstnConfig {
  double trim_lo = 0.05;
  double trim_hi = 0.95;
  bool use_overlap = true;
  bool use_stabilized = true;
  /// Score the training periods of a forest propensity model out-of-bag
  /// rather than with the full (overfit) ensemble.
  bool forest_out_of_bag = true;

  void validate() const;
};

struct PstnPeriod {
  int t = 0;
  double pi_hat = 0.0;
  double weight = 0.0;   // multiplier on Y_t; 0 when excluded
  bool retained = false;
};

struct PstnResult {
  double delta = 0.0;
  double mean_po_1 = 0.0;
  double mean_po_0 = 0.0;
  std::vector<int> retained;        // period indices kept
  std::vector<PstnPeriod> periods;  // every analyzable period
  int excluded_trim = 0;
  int excluded_overlap = 0;
  Interval overlap_region{0.0, 1.0};
  double share_1 = 1.0;             // stabilization proportions
  double share_0 = 1.0;
};

/// Core weighting on explicit propensities. `t`, `y`, `x`, `pi_hat` are
/// parallel.
PstnResult pstn_from_scores(std::span<const int> t, std::span<const double> y,
                            std::span<const int> x, std::span<const double> pi_hat,
                            const PstnConfig& cfg);

/// pi-hat for every period the model's layout can encode, paired with the
/// period index.
struct PropensityScores {
  std::vector<int> t;
  std::vector<double> y;
  std::vector<int> x;
  std::vector<double> pi_hat;
};
/// With `training` set, `ds` must be the dataset the model was fitted on and
/// forest scores are taken out-of-bag.
PropensityScores predict_propensities(const TimeSeriesDataset& ds, const FittedPropensityModel& model,
                                      bool training = false);

/// `ds` is the dataset `model` was fitted on.
PstnResult run_pstn(const TimeSeriesDataset& ds, const FittedPropensityModel& model,
                    const PstnConfig& cfg);

}  // namespace nof1
