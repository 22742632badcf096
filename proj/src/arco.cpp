#include "nof1/arco.hpp"

#include <cassert>
#include <cmath>

#include "nof1/errors.hpp"

namespace nof1 {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

ArcoParams ArcoParams::study_default() {
  ArcoParams p;
  p.beta0 = 2.0;
  p.betaX = 1.1;
  p.beta_ar = 0.8;
  p.sigma_eps = 0.5;
  return p;
}

double ArcoParams::conditional_mean(int s, double x_lag, double y_lag,
                                    const std::vector<double>& exog) const {
  return beta0 + betaX * s + beta_co * x_lag + beta_Xco * s * x_lag + beta_ar * y_lag +
         beta_Xar * s * y_lag + dot(beta_ex, exog);
}

void ArcoParams::validate() const {
  for (double v : {beta0, betaX, beta_co, beta_Xco, beta_ar, beta_Xar, sigma_eps}) {
    if (!std::isfinite(v)) throw ConfigError("ARCO parameters must be finite");
  }
  if (sigma_eps < 0.0) throw ConfigError("sigma_eps must be non-negative");
}

void ArcoParams::require_stationary() const {
  validate();
  if (!(std::abs(beta_ar) < 1.0) || !(std::abs(beta_ar) + std::abs(beta_Xar) < 1.0)) {
    throw ConfigError("nonstationary ARCO parameters: need |beta_ar| < 1 and "
                      "|beta_ar| + |beta_Xar| < 1");
  }
}

PropensityParams PropensityParams::study_default() {
  PropensityParams q;
  q.alpha0 = -0.25;
  q.alpha_en = 1.25;
  q.pi1 = 0.5;
  return q;
}

PropensityParams PropensityParams::uncentered() {
  PropensityParams q = study_default();
  q.centering = PropensityCentering::none;
  q.rule = ExposureRule::u_below_pi;
  return q;
}

void PropensityParams::validate() const {
  for (double v : {alpha0, alpha_en, alpha_ar, center_value}) {
    if (!std::isfinite(v)) throw ConfigError("propensity parameters must be finite");
  }
  if (!(pi1 > 0.0 && pi1 < 1.0)) throw ConfigError("pi1 must lie strictly between 0 and 1");
}

void SimConfig::validate() const {
  if (m_analysis < 10) throw ConfigError("m_analysis must be at least 10");
  if (burn_in < 0) throw ConfigError("burn_in must be non-negative");
  if (!(randomized_pi >= 0.0 && randomized_pi <= 1.0)) {
    throw ConfigError("randomized_pi must lie in [0, 1]");
  }
  if (!exog_rows.empty() &&
      exog_rows.size() != static_cast<std::size_t>(m_analysis + burn_in)) {
    throw ConfigError("exogenous series must cover all m_analysis + burn_in periods");
  }
  for (const auto& row : exog_rows) {
    if (row.size() != exog_names.size()) {
      throw ConfigError("exogenous row width does not match exog_names");
    }
  }
}

double long_run_mean(const ArcoParams& p, double pi, const std::vector<double>& mu_v) {
  p.require_stationary();
  if (!(pi >= 0.0 && pi <= 1.0)) throw ConfigError("pi must lie in [0, 1]");
  if (mu_v.size() != p.beta_ex.size()) {
    throw ConfigError("mu_V length does not match beta_ex");
  }
  const double denom = 1.0 - p.beta_ar - p.beta_Xar * pi;
  if (!(denom > 0.0)) {
    throw ConfigError("nonstationary ARCO parameters: 1 - beta_ar - beta_Xar*pi <= 0");
  }
  const double num = p.beta0 + p.betaX * pi + p.beta_co * pi + p.beta_Xco * pi * pi +
                     dot(mu_v, p.beta_ex);
  return num / denom;
}

double long_run_apte(const ArcoParams& p, double pi, double mu_y) {
  p.require_stationary();
  if (!(pi >= 0.0 && pi <= 1.0)) throw ConfigError("pi must lie in [0, 1]");
  return p.betaX + p.beta_Xco * pi + p.beta_Xar * mu_y;
}

double propensity_center(const ArcoParams& p, const PropensityParams& q,
                         const std::vector<double>& mu_v) {
  switch (q.centering) {
    case PropensityCentering::none: return 0.0;
    case PropensityCentering::fixed: return q.center_value;
    case PropensityCentering::long_run_mean: return long_run_mean(p, q.pi1, mu_v);
  }
  return 0.0;
}

SimulationTrace simulate_trace(const ArcoParams& p, const PropensityParams& q,
                               const SimConfig& cfg) {
  p.validate();
  q.validate();
  cfg.validate();
  const std::size_t n_exog = cfg.exog_names.size();
  if (p.beta_ex.size() != n_exog) {
    throw ConfigError("beta_ex has " + std::to_string(p.beta_ex.size()) +
                      " entries but the simulation has " + std::to_string(n_exog) +
                      " exogenous columns");
  }
  if (!q.alpha_ex.empty() && q.alpha_ex.size() != n_exog) {
    throw ConfigError("alpha_ex length does not match the exogenous columns");
  }
  const std::vector<double> alpha_ex =
      q.alpha_ex.empty() ? std::vector<double>(n_exog, 0.0) : q.alpha_ex;

  const int total = cfg.m_analysis + cfg.burn_in;
  std::vector<double> mu_v(n_exog, 0.0);
  for (const auto& row : cfg.exog_rows) {
    for (std::size_t j = 0; j < n_exog; ++j) mu_v[j] += row[j] / total;
  }
  const double center = cfg.randomized_mode ? 0.0 : propensity_center(p, q, mu_v);

  RandomStream noise = cfg.seed.stream("arco.noise");
  RandomStream assign = cfg.seed.stream("arco.exposure");
  const std::vector<double> no_exog(n_exog, 0.0);
  auto exog_at = [&](int i) -> const std::vector<double>& {
    return cfg.exog_rows.empty() ? no_exog : cfg.exog_rows[static_cast<std::size_t>(i)];
  };

  std::vector<double> y(total), y1(total), y0(total);
  std::vector<int> x(total);
  for (int i = 0; i < total; ++i) {
    const double eps = p.sigma_eps * noise.normal();
    const double u = assign.uniform();
    if (i == 0) {
      y1[0] = y0[0] = y[0] = p.beta0 + eps;
      const double pi = cfg.randomized_mode ? cfg.randomized_pi : q.pi1;
      x[0] = u < pi ? 1 : 0;
      continue;
    }
    const auto& v = exog_at(i);
    y1[i] = p.conditional_mean(1, x[i - 1], y[i - 1], v) + eps;
    y0[i] = p.conditional_mean(0, x[i - 1], y[i - 1], v) + eps;
    if (cfg.randomized_mode) {
      x[i] = u < cfg.randomized_pi ? 1 : 0;
    } else {
      const double pi = expit(q.alpha0 + q.alpha_en * (y[i - 1] - center) +
                              q.alpha_ar * x[i - 1] + dot(alpha_ex, v));
      const bool hit = q.rule == ExposureRule::u_below_pi ? (u < pi) : (u > pi);
      x[i] = hit ? 1 : 0;
    }
    y[i] = y1[i] * x[i] + y0[i] * (1 - x[i]);
    assert(y[i] == (x[i] == 1 ? y1[i] : y0[i]));
  }

  SimulationTrace out;
  out.dataset.exog_names = cfg.exog_names;
  out.dataset.burn_in_dropped = cfg.burn_in;
  for (int i = cfg.burn_in; i < total; ++i) {
    out.dataset.periods.push_back({i - cfg.burn_in + 1, y[i], x[i], exog_at(i)});
    out.y1.push_back(y1[i]);
    out.y0.push_back(y0[i]);
  }
  out.dataset.validate();
  return out;
}

TimeSeriesDataset simulate_dataset(const ArcoParams& p, const PropensityParams& q,
                                   const SimConfig& cfg) {
  return simulate_trace(p, q, cfg).dataset;
}

}  // namespace nof1
