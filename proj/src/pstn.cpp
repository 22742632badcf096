#include "nof1/pstn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nof1/errors.hpp"

namespace nof1 {

void PstnConfig::validate() const {
  if (!(trim_lo >= 0.0 && trim_lo < trim_hi && trim_hi <= 1.0)) {
    throw ConfigError("PSTn trim bounds must satisfy 0 <= lo < hi <= 1");
  }
}

PstnResult pstn_from_scores(std::span<const int> t, std::span<const double> y,
                            std::span<const int> x, std::span<const double> pi_hat,
                            const PstnConfig& cfg) {
  cfg.validate();
  const std::size_t n = t.size();
  if (y.size() != n || x.size() != n || pi_hat.size() != n) {
    throw DataError("PSTn inputs have mismatched lengths");
  }

  PstnResult res;
  res.periods.resize(n);
  std::vector<bool> keep(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    res.periods[i].t = t[i];
    res.periods[i].pi_hat = pi_hat[i];
    keep[i] = pi_hat[i] > cfg.trim_lo && pi_hat[i] < cfg.trim_hi;
    if (!keep[i]) ++res.excluded_trim;
  }

  if (cfg.use_overlap) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double min1 = inf, max1 = -inf, min0 = inf, max0 = -inf;
    for (std::size_t i = 0; i < n; ++i) {
      if (!keep[i]) continue;
      if (x[i] == 1) {
        min1 = std::min(min1, pi_hat[i]);
        max1 = std::max(max1, pi_hat[i]);
      } else {
        min0 = std::min(min0, pi_hat[i]);
        max0 = std::max(max0, pi_hat[i]);
      }
    }
    // With an arm already emptied by trimming there is no common support to
    // compute; leave the remaining periods alone so the error counts stay honest.
    const bool both_arms = min1 != inf && min0 != inf;
    if (both_arms) res.overlap_region = {std::max(min1, min0), std::min(max1, max0)};
    for (std::size_t i = 0; i < n; ++i) {
      if (both_arms && keep[i] && !res.overlap_region.covers(pi_hat[i])) {
        keep[i] = false;
        ++res.excluded_overlap;
      }
    }
  }

  long m1 = 0, m0 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) (x[i] == 1 ? m1 : m0) += 1;
  }
  if (m1 == 0 || m0 == 0) {
    throw EstimatorError("PSTn exclusions emptied an exposure arm (retained x=1: " +
                         std::to_string(m1) + ", x=0: " + std::to_string(m0) +
                         "; excluded by trimming: " + std::to_string(res.excluded_trim) +
                         ", by overlap: " + std::to_string(res.excluded_overlap) + ")");
  }
  const double total = static_cast<double>(m1 + m0);
  if (cfg.use_stabilized) {
    res.share_1 = static_cast<double>(m1) / total;
    res.share_0 = static_cast<double>(m0) / total;
  }

  double sum1 = 0.0, sum0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    const double p_obs = x[i] == 1 ? pi_hat[i] : 1.0 - pi_hat[i];
    const double w = (x[i] == 1 ? res.share_1 : res.share_0) / p_obs;
    res.periods[i].weight = w;
    res.periods[i].retained = true;
    res.retained.push_back(t[i]);
    (x[i] == 1 ? sum1 : sum0) += y[i] * w;
  }
  res.mean_po_1 = sum1 / static_cast<double>(m1);
  res.mean_po_0 = sum0 / static_cast<double>(m0);
  res.delta = res.mean_po_1 - res.mean_po_0;
  return res;
}

PropensityScores predict_propensities(const TimeSeriesDataset& ds,
                                      const FittedPropensityModel& model, bool training) {
  const FeatureMatrix fm = assemble_features(ds, model.layout());
  PropensityScores s;
  s.t = fm.periods;
  s.y = fm.y;
  s.x = fm.x;
  s.pi_hat.reserve(fm.rows());
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    s.pi_hat.push_back(training ? model.predict_prob_training(fm.row(i), i)
                                : model.predict_prob(fm.row(i)));
  }
  return s;
}

PstnResult run_pstn(const TimeSeriesDataset& ds, const FittedPropensityModel& model,
                    const PstnConfig& cfg) {
  const PropensityScores s = predict_propensities(ds, model, cfg.forest_out_of_bag);
  return pstn_from_scores(s.t, s.y, s.x, s.pi_hat, cfg);
}

}  // namespace nof1
