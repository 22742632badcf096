#pragma once

#include <span>
#include <vector>

#include "nof1/dataset.hpp"
#include "nof1/models/fitted.hpp"
#include "nof1/rng.hpp"
#include "nof1/stats.hpp"

namespace nof1 {

/// Model-twin randomization settings. A run loop stops at the first r with
/// r >= r_min for which each of the cumulative delta, lower and upper bound
/// moved by less than stop_tol at every one of the last stop_window runs, or
/// at r_max.
struct MotrConfig {
  int r_min = 10;
  int r_max = 200;
  double stop_tol = 1e-3;
  int stop_window = 5;
  SeedSpec seed{};

  void validate() const;
};

/// Fixed lag values for the first generated period. Periods before
/// `first_generated` are the pre-sample history: their observed outcome and
/// exposure feed the lags of period first_generated + 1 and are never
/// re-randomized or averaged.
struct InitialConditions {
  std::size_t first_generated = 0;  // 0-based position into ds.periods
  double y_lag = 0.0;
  double x_lag = 0.0;
};

InitialConditions initial_conditions(const TimeSeriesDataset& ds, const FeatureSpec& spec);

struct MotrRun {
  int r = 0;
  std::vector<int> permuted_x;      // one per generated period
  std::vector<double> noisy_preds;  // Y-hat_rt, one per generated period
  double mean_po_1 = 0.0;
  double mean_po_0 = 0.0;
  double delta = 0.0;               // mean_po_1 - mean_po_0
  Interval ci;                      // Welch t on noisy_preds split by arm
  bool ci_degenerate = false;
};

struct CumulativePoint {
  int r = 0;
  double delta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double mean_po_1 = 0.0;
  double mean_po_0 = 0.0;
};

struct RunSummary {
  int r = 0;
  double delta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ApteEstimate {
  double delta = 0.0;
  Interval ci;
  int runs_used = 0;
  bool stopped_early = false;   // stopping rule fired before r_max
  bool ci_degenerate = false;   // some run had an undefined interval
  double mean_po_1 = 0.0;
  double mean_po_0 = 0.0;
  std::vector<CumulativePoint> trajectory;
  std::vector<RunSummary> runs;
};

/// One simulated trial: roll the model forward over the generated periods
/// with the given exposure sequence. Lagged outcomes come from this rollout's
/// own noisy predictions, lagged exposures from `exposures`, exogenous values
/// from the dataset. `noise` may be null, or the model's resid_sd zero, for a
/// noise-free rollout.
MotrRun motr_rollout(const TimeSeriesDataset& ds, const FittedOutcomeModel& model,
                     std::span<const int> exposures, RandomStream* noise, int r = 1);

/// Full procedure: permute the observed generated-period exposures, roll
/// out, and average per-run contrasts and interval bounds cumulatively.
ApteEstimate run_motr(const TimeSeriesDataset& ds, const FittedOutcomeModel& model,
                      const MotrConfig& cfg);

}  // namespace nof1
