#include "nof1/motr.hpp"

#include <algorithm>
#include <cmath>

#include "nof1/errors.hpp"

namespace nof1 {

void MotrConfig::validate() const {
  if (r_min < 1 || r_min > r_max) throw ConfigError("MoTR needs 1 <= r_min <= r_max");
  if (!(stop_tol > 0.0)) throw ConfigError("MoTR stop_tol must be positive");
  if (stop_window < 1) throw ConfigError("MoTR stop_window must be at least 1");
}

InitialConditions initial_conditions(const TimeSeriesDataset& ds, const FeatureSpec& spec) {
  if (ds.periods.empty()) throw DataError("initial conditions need a nonempty dataset");
  InitialConditions ic;
  ic.first_generated = spec.uses_lags() ? 1 : 0;
  if (ic.first_generated > 0) {
    ic.y_lag = ds.periods.front().y;
    ic.x_lag = ds.periods.front().x;
  }
  if (ic.first_generated >= ds.size()) {
    throw DataError("dataset has no period left to generate after the initial conditions");
  }
  return ic;
}

MotrRun motr_rollout(const TimeSeriesDataset& ds, const FittedOutcomeModel& model,
                     std::span<const int> exposures, RandomStream* noise, int r) {
  const FeatureLayout& layout = model.layout();
  const InitialConditions ic = initial_conditions(ds, layout.spec());
  const std::size_t n = ds.size() - ic.first_generated;
  if (exposures.size() != n) {
    throw DataError("exposure sequence has " + std::to_string(exposures.size()) +
                    " entries for " + std::to_string(n) + " generated periods");
  }

  MotrRun run;
  run.r = r;
  run.permuted_x.assign(exposures.begin(), exposures.end());
  run.noisy_preds.resize(n);
  const double sd = model.resid_sd();
  std::vector<double> row(layout.width());
  double y_lag = ic.y_lag;
  double x_lag = ic.x_lag;
  std::vector<double> arm1, arm0;
  arm1.reserve(n);
  arm0.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& period = ds.periods[ic.first_generated + k];
    const int x = exposures[k];
    layout.encode(FeatureInputs{static_cast<double>(x), x_lag, y_lag, period.exog}, row);
    double yhat = model.predict_mean(row);
    if (noise != nullptr && sd > 0.0) yhat += sd * noise->normal();
    run.noisy_preds[k] = yhat;
    (x == 1 ? arm1 : arm0).push_back(yhat);
    y_lag = yhat;
    x_lag = x;
  }
  if (arm1.empty() || arm0.empty()) {
    throw EstimatorError("MoTR needs both exposure levels among the generated periods");
  }
  run.mean_po_1 = mean(arm1);
  run.mean_po_0 = mean(arm0);
  run.delta = run.mean_po_1 - run.mean_po_0;
  const WelchResult w = welch_interval(arm1, arm0);
  run.ci_degenerate = w.degenerate;
  run.ci = w.degenerate ? Interval{run.delta, run.delta} : w.ci;
  return run;
}

ApteEstimate run_motr(const TimeSeriesDataset& ds, const FittedOutcomeModel& model,
                      const MotrConfig& cfg) {
  cfg.validate();
  if (ds.size() < 3) throw DataError("MoTR needs at least 3 periods");
  const InitialConditions ic = initial_conditions(ds, model.layout().spec());
  std::vector<int> observed;
  for (std::size_t i = ic.first_generated; i < ds.size(); ++i) observed.push_back(ds.periods[i].x);

  ApteEstimate est;
  double sum_delta = 0.0, sum_lo = 0.0, sum_hi = 0.0, sum_po1 = 0.0, sum_po0 = 0.0;
  for (int r = 1; r <= cfg.r_max; ++r) {
    std::vector<int> perm = observed;
    RandomStream shuffle = cfg.seed.stream("motr.permute", static_cast<std::uint64_t>(r));
    shuffle.shuffle(std::span<int>(perm));
    RandomStream noise = cfg.seed.stream("motr.noise", static_cast<std::uint64_t>(r));
    const MotrRun run = motr_rollout(ds, model, perm, &noise, r);

    est.ci_degenerate = est.ci_degenerate || run.ci_degenerate;
    est.runs.push_back({r, run.delta, run.ci.lo, run.ci.hi});
    sum_delta += run.delta;
    sum_lo += run.ci.lo;
    sum_hi += run.ci.hi;
    sum_po1 += run.mean_po_1;
    sum_po0 += run.mean_po_0;
    const double rr = static_cast<double>(r);
    est.trajectory.push_back({r, sum_delta / rr, sum_lo / rr, sum_hi / rr, sum_po1 / rr, sum_po0 / rr});
    est.runs_used = r;

    if (r >= cfg.r_min && r > cfg.stop_window) {
      bool settled = true;
      for (int j = r - cfg.stop_window + 1; j <= r && settled; ++j) {
        const auto& cur = est.trajectory[static_cast<std::size_t>(j - 1)];
        const auto& prev = est.trajectory[static_cast<std::size_t>(j - 2)];
        settled = std::abs(cur.delta - prev.delta) < cfg.stop_tol &&
                  std::abs(cur.lo - prev.lo) < cfg.stop_tol &&
                  std::abs(cur.hi - prev.hi) < cfg.stop_tol;
      }
      if (settled) {
        est.stopped_early = r < cfg.r_max;
        break;
      }
    }
  }
  const auto& last = est.trajectory.back();
  est.delta = last.delta;
  est.ci = {last.lo, last.hi};
  est.mean_po_1 = last.mean_po_1;
  est.mean_po_0 = last.mean_po_0;
  return est;
}

}  // namespace nof1
