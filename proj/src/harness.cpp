#include "nof1/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "nof1/errors.hpp"

namespace nof1 {

std::string to_string(MethodId m) {
  switch (m) {
    case MethodId::raw: return "raw";
    case MethodId::coef: return "coef";
    case MethodId::motr_glm: return "motr_glm";
    case MethodId::pstn_glm: return "pstn_glm";
    case MethodId::motr_rf: return "motr_rf";
    case MethodId::pstn_rf: return "pstn_rf";
  }
  return "raw";
}

MethodId method_from_string(const std::string& s) {
  std::string norm = s;
  std::replace(norm.begin(), norm.end(), '-', '_');
  for (MethodId m : all_methods) {
    if (to_string(m) == norm) return m;
  }
  throw ConfigError("unknown method '" + s + "' (raw|coef|motr-glm|pstn-glm|motr-rf|pstn-rf)");
}

PointEstimate estimate_raw(const TimeSeriesDataset& ds) {
  std::vector<double> arm1, arm0;
  for (const auto& p : ds.periods) (p.x == 1 ? arm1 : arm0).push_back(p.y);
  if (arm1.empty() || arm0.empty()) {
    throw EstimatorError("raw comparison needs both exposure levels (x=1: " +
                         std::to_string(arm1.size()) + ", x=0: " + std::to_string(arm0.size()) + ")");
  }
  const WelchResult w = welch_interval(arm1, arm0);
  PointEstimate e;
  e.estimate = w.difference;
  e.ci_degenerate = w.degenerate;
  e.ci = w.degenerate ? Interval{e.estimate, e.estimate} : w.ci;
  return e;
}

PointEstimate estimate_coef(const TimeSeriesDataset& ds) {
  const FeatureMatrix fm = assemble_features(ds, FeatureSpec::outcome_default());
  const FittedOutcomeModel model = fit_linear_outcome(fm);
  const LinearFit& fit = *model.linear();
  PointEstimate e;
  e.estimate = fit.coefficient("x");
  e.ci_degenerate = fit.df_resid <= 0;
  e.ci = e.ci_degenerate ? Interval{e.estimate, e.estimate} : fit.confidence_interval("x");
  return e;
}

namespace {

FittedOutcomeModel fit_outcome(MethodId method, const TimeSeriesDataset& ds,
                               const MethodSettings& s, const SeedSpec& seed) {
  const FeatureMatrix fm = assemble_features(ds, s.outcome);
  if (method == MethodId::motr_glm) return fit_linear_outcome(fm);
  ForestConfig fc = s.forest;
  fc.seed = seed.child("forest");
  return fit_forest_outcome(fm, fc);
}

FittedPropensityModel fit_propensity(MethodId method, const TimeSeriesDataset& ds,
                                     const MethodSettings& s, const SeedSpec& seed) {
  const FeatureMatrix fm = assemble_features(ds, s.propensity);
  if (method == MethodId::pstn_glm) return fit_logistic_propensity(fm, fm.x, s.irls);
  ForestConfig fc = s.propensity_forest;
  fc.seed = seed.child("forest");
  return fit_forest_propensity(fm, fc);
}

}  // namespace

MethodResult apply_method(MethodId method, const TimeSeriesDataset& ds,
                          const MethodSettings& settings, const SeedSpec& seed) {
  MethodResult r;
  r.method = method;
  switch (method) {
    case MethodId::raw:
    case MethodId::coef: {
      const PointEstimate e = method == MethodId::raw ? estimate_raw(ds) : estimate_coef(ds);
      r.estimate = e.estimate;
      r.ci = e.ci;
      r.has_ci = true;
      break;
    }
    case MethodId::motr_glm:
    case MethodId::motr_rf: {
      const FittedOutcomeModel model = fit_outcome(method, ds, settings, seed);
      MotrConfig mc = settings.motr;
      mc.seed = seed.child("motr");
      const ApteEstimate est = run_motr(ds, model, mc);
      r.estimate = est.delta;
      r.ci = est.ci;
      r.has_ci = true;
      break;
    }
    case MethodId::pstn_glm:
    case MethodId::pstn_rf: {
      const FittedPropensityModel model = fit_propensity(method, ds, settings, seed);
      r.estimate = run_pstn(ds, model, settings.pstn).delta;
      break;
    }
  }
  return r;
}

void StudyConfig::validate() const {
  if (datasets < 2) throw ConfigError("a replication study needs at least 2 datasets");
  if (methods.empty()) throw ConfigError("a replication study needs at least one method");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  params.validate();
  propensity.validate();
  sim.validate();
  settings.motr.validate();
  settings.pstn.validate();
}

const MethodSummary& ReplicationReport::of(MethodId m) const {
  for (const auto& s : summary) {
    if (s.method == m) return s;
  }
  throw ConfigError("method " + to_string(m) + " is not part of this report");
}

MethodSummary summarize_biases(MethodId method, const std::vector<double>& biases, int failures) {
  MethodSummary s;
  s.method = method;
  s.n = static_cast<int>(biases.size());
  s.failures = failures;
  if (biases.empty()) {
    s.mean_bias = s.ci_lo = s.ci_hi = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean_bias = mean(biases);
  const double half = biases.size() >= 2
                          ? 1.96 * sample_sd(biases) / std::sqrt(static_cast<double>(biases.size()))
                          : 0.0;
  s.ci_lo = s.mean_bias - half;
  s.ci_hi = s.mean_bias + half;
  return s;
}

namespace {

std::size_t method_index(MethodId m) {
  return static_cast<std::size_t>(std::find(all_methods.begin(), all_methods.end(), m) -
                                  all_methods.begin());
}

std::vector<ReplicationRow> run_dataset(const StudyConfig& study, int h, double truth) {
  std::vector<ReplicationRow> rows;
  SimConfig sim = study.sim;
  sim.seed = study.seed.child("dataset", static_cast<std::uint64_t>(h));
  TimeSeriesDataset ds;
  std::string sim_error;
  try {
    ds = simulate_dataset(study.params, study.propensity, sim);
  } catch (const std::exception& e) {
    sim_error = std::string("simulation failed: ") + e.what();
  }
  for (MethodId m : study.methods) {
    ReplicationRow row;
    row.h = h;
    row.method = m;
    if (!sim_error.empty()) {
      row.failed = true;
      row.error = sim_error;
    } else {
      try {
        const SeedSpec seed =
            study.seed.child("method", static_cast<std::uint64_t>(h), method_index(m));
        row.estimate = apply_method(m, ds, study.settings, seed).estimate;
        row.bias = row.estimate - truth;
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

ReplicationReport replicate(const StudyConfig& study) {
  study.validate();
  const double truth = study.resolved_true_apte();
  const auto n = static_cast<std::size_t>(study.datasets);
  std::vector<std::vector<ReplicationRow>> per_h(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      per_h[i] = run_dataset(study, static_cast<int>(i) + 1, truth);
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(study.workers), n);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ReplicationReport report;
  report.true_apte = truth;
  for (auto& rows : per_h) {
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    return a.h != b.h ? a.h < b.h : method_index(a.method) < method_index(b.method);
  });
  for (MethodId m : study.methods) {
    std::vector<double> biases;
    int failures = 0;
    for (const auto& r : report.rows) {
      if (r.method != m) continue;
      if (r.failed) {
        ++failures;
      } else {
        biases.push_back(r.bias);
      }
    }
    report.summary.push_back(summarize_biases(m, biases, failures));
  }
  return report;
}

void write_rows_csv(std::ostream& out, const ReplicationReport& report, const ResolvedConfig& echo) {
  echo.write_comments(out);
  out << "# true_apte=" << format_double(report.true_apte) << "\n";
  out << "h,method,estimate,bias,error\n";
  for (const auto& r : report.rows) {
    out << r.h << ',' << to_string(r.method) << ',';
    if (r.failed) {
      out << ",," << csv_field(r.error) << '\n';
    } else {
      out << format_double(r.estimate) << ',' << format_double(r.bias) << ",\n";
    }
  }
}

void write_summary_csv(std::ostream& out, const ReplicationReport& report,
                       const ResolvedConfig& echo) {
  echo.write_comments(out);
  out << "# true_apte=" << format_double(report.true_apte) << "\n";
  out << "method,mean_bias,ci_lo,ci_hi,n,failures\n";
  for (const auto& s : report.summary) {
    out << to_string(s.method) << ',';
    if (s.n == 0) {
      out << ",,,";
    } else {
      out << format_double(s.mean_bias) << ',' << format_double(s.ci_lo) << ','
          << format_double(s.ci_hi) << ',';
    }
    out << s.n << ',' << s.failures << '\n';
  }
}

}  // namespace nof1
