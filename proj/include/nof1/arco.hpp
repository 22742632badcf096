#pragma once

#include <string>
#include <vector>

#include "nof1/dataset.hpp"
#include "nof1/rng.hpp"

namespace nof1 {

/// Lag-1 autoregressive carryover outcome mechanism:
///   Y_t = b0 + bX X_t + bco X_{t-1} + bXco X_t X_{t-1}
///       + bar Y_{t-1} + bXar X_t Y_{t-1} + V_t . bex + e_t,   e_t ~ N(0, sigma)
struct ArcoParams {
  double beta0 = 0.0;
  double betaX = 0.0;
  double beta_co = 0.0;
  double beta_Xco = 0.0;
  double beta_ar = 0.0;
  double beta_Xar = 0.0;
  std::vector<double> beta_ex;
  double sigma_eps = 0.0;

  /// The simulation-study outcome parameters: b0=2, bX=1.1, bar=0.8, sigma=0.5.
  static ArcoParams study_default();

  /// Mean of Y_t given exposure s, previous exposure and outcome, and V_t.
  double conditional_mean(int s, double x_lag, double y_lag, const std::vector<double>& exog) const;

  void validate() const;
  /// Throws unless |bar| < 1 and |bar| + |bXar| < 1.
  void require_stationary() const;
};

/// How the uniform draw U_t turns a propensity into an exposure.
enum class ExposureRule {
  u_below_pi,  // X = 1 iff U < pi_t, so Pr(X = 1) = pi_t
  u_above_pi,  // X = 1 iff U > pi_t, so Pr(X = 1) = 1 - pi_t
};

/// What the lagged outcome is measured against inside the logit.
enum class PropensityCentering {
  none,           // logit uses Y_{t-1} as is
  long_run_mean,  // logit uses Y_{t-1} - mu_Y(pi1)
  fixed,          // logit uses Y_{t-1} - center_value
};

/// logit(pi_t) = a0 + a_en (Y_{t-1} - c) + a_ar X_{t-1} + V_t . a_ex
struct PropensityParams {
  double alpha0 = 0.0;
  double alpha_en = 0.0;
  double alpha_ar = 0.0;
  std::vector<double> alpha_ex;
  double pi1 = 0.5;
  PropensityCentering centering = PropensityCentering::long_run_mean;
  double center_value = 0.0;
  ExposureRule rule = ExposureRule::u_above_pi;

  /// a0=-0.25, a_en=1.25, pi1=0.5 with the default centering and rule.
  static PropensityParams study_default();
  /// The same coefficients read literally: uncentered logit, X = 1 iff U < pi.
  static PropensityParams uncentered();

  void validate() const;
};

struct SimConfig {
  int m_analysis = 220;
  int burn_in = 2;
  SeedSpec seed{};
  bool randomized_mode = false;  // X_t ~ Bernoulli(randomized_pi) i.i.d.
  double randomized_pi = 0.5;
  /// Optional fixed exogenous series covering all m_analysis + burn_in
  /// generated periods.
  std::vector<std::string> exog_names;
  std::vector<std::vector<double>> exog_rows;

  void validate() const;
};

/// Dataset plus both potential outcomes of every retained period.
struct SimulationTrace {
  TimeSeriesDataset dataset;
  std::vector<double> y1;
  std::vector<double> y0;
};

SimulationTrace simulate_trace(const ArcoParams& p, const PropensityParams& q,
                               const SimConfig& cfg);
TimeSeriesDataset simulate_dataset(const ArcoParams& p, const PropensityParams& q,
                                   const SimConfig& cfg);

/// mu_Y = (b0 + bX pi + bco pi + bXco pi^2 + muV.bex) / (1 - bar - bXar pi)
double long_run_mean(const ArcoParams& p, double pi, const std::vector<double>& mu_v = {});

/// bX + bXco pi + bXar mu_Y
double long_run_apte(const ArcoParams& p, double pi, double mu_y);

/// Logit offset actually subtracted from Y_{t-1} for the given parameters.
double propensity_center(const ArcoParams& p, const PropensityParams& q,
                         const std::vector<double>& mu_v = {});

}  // namespace nof1
