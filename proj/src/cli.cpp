#include "nof1/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nof1/errors.hpp"
#include "nof1/motr.hpp"
#include "nof1/pstn.hpp"

namespace nof1::cli {

using nlohmann::json;

namespace {

// Typed wrappers: ResolvedConfig's overload set is easy to misroute from int
// or string-literal arguments.
void put(ResolvedConfig& e, const std::string& k, const std::string& v) { e.add(k, v); }
void put(ResolvedConfig& e, const std::string& k, double v) { e.add(k, v); }
void put_int(ResolvedConfig& e, const std::string& k, long v) { e.add(k, v); }
void put_bool(ResolvedConfig& e, const std::string& k, bool v) { e.add(k, v); }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string join(const std::vector<double>& items) {
  std::vector<std::string> s;
  for (double v : items) s.push_back(format_double(v));
  return join(s);
}

int read_int(const KeyValueConfig& cfg, ResolvedConfig& e, const std::string& key, long fallback) {
  const long v = cfg.get_int(key, fallback);
  put_int(e, key, v);
  return static_cast<int>(v);
}

double read_double(const KeyValueConfig& cfg, ResolvedConfig& e, const std::string& key,
                   double fallback) {
  const double v = cfg.get_double(key, fallback);
  put(e, key, v);
  return v;
}

bool read_bool(const KeyValueConfig& cfg, ResolvedConfig& e, const std::string& key, bool fallback) {
  const bool v = cfg.get_bool(key, fallback);
  put_bool(e, key, v);
  return v;
}

std::string read_string(const KeyValueConfig& cfg, ResolvedConfig& e, const std::string& key,
                        const std::string& fallback) {
  const std::string v = cfg.get_string(key, fallback);
  put(e, key, v);
  return v;
}

std::vector<double> read_doubles(const KeyValueConfig& cfg, ResolvedConfig& e, const std::string& key) {
  const auto v = cfg.get_doubles(key);
  put(e, key, join(v));
  return v;
}

std::vector<std::string> read_strings(const KeyValueConfig& cfg, ResolvedConfig& e,
                                      const std::string& key,
                                      const std::vector<std::string>& fallback = {}) {
  const auto v = cfg.has(key) ? cfg.get_strings(key) : fallback;
  put(e, key, join(v));
  return v;
}

FeatureSpec read_feature_spec(const KeyValueConfig& cfg, ResolvedConfig& e, const std::string& prefix,
                              FeatureSpec spec, const std::vector<std::string>& exog_default) {
  spec.outcome_lag =
      outcome_lag_from_string(read_string(cfg, e, prefix + "outcome_lag", to_string(spec.outcome_lag)));
  spec.use_exposure_lag1 = read_bool(cfg, e, prefix + "exposure_lag1", spec.use_exposure_lag1);
  spec.exog_names = read_strings(cfg, e, prefix + "exog", exog_default);
  return spec;
}

ForestConfig read_forest(const KeyValueConfig& cfg, ResolvedConfig& e, const std::string& prefix,
                         ForestConfig f) {
  f.n_trees = read_int(cfg, e, prefix + "n_trees", f.n_trees);
  f.mtry = read_int(cfg, e, prefix + "mtry", f.mtry);
  f.min_node_size = read_int(cfg, e, prefix + "min_node_size", f.min_node_size);
  f.max_depth = read_int(cfg, e, prefix + "max_depth", f.max_depth);
  f.bootstrap = read_bool(cfg, e, prefix + "bootstrap", f.bootstrap);
  return f;
}

json echo_json(const ResolvedConfig& echo) {
  json j = json::object();
  for (const auto& [k, v] : echo.entries()) j[k] = v;
  return j;
}

json interval_json(const Interval& ci) { return json{{"lo", ci.lo}, {"hi", ci.hi}}; }

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  return f;
}

void emit_json(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
  } else {
    auto f = open_output(path);
    f << text;
    if (!f) throw DataError("failed writing '" + path + "'");
  }
}

// Options common to every subcommand.
struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--set", sets, "key=value override (repeatable)");
    sub->add_option("--seed", seed, "base seed (overrides the 'seed' key)");
  }

  KeyValueConfig resolve() const {
    KeyValueConfig cfg = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
    for (const auto& s : sets) cfg.set_assignment(s);
    if (seed) cfg.set("seed", std::to_string(*seed));
    cfg.require_known(known_keys());
    return cfg;
  }
};

int cmd_simulate(const KeyValueConfig& cfg, const std::string& out_path, std::ostream& out) {
  ResolvedConfig echo;
  const SeedSpec seed = read_seed(cfg, echo);
  const ArcoParams p = read_arco(cfg, echo);
  const PropensityParams q = read_propensity(cfg, echo);
  const SimConfig sim = read_sim(cfg, seed, echo);
  if (!p.beta_ex.empty()) {
    throw ConfigError("simulate has no exogenous series to apply beta_ex to");
  }
  const TimeSeriesDataset ds = simulate_dataset(p, q, sim);
  std::ostringstream text;
  echo.write_comments(text);
  write_dataset_csv(text, ds);
  if (out_path.empty() || out_path == "-") {
    out << text.str();
  } else {
    auto f = open_output(out_path);
    f << text.str();
  }
  return exit_ok;
}

struct AnalyzePaths {
  std::string data;
  std::string method;
  std::string out;
  std::string dump_model;
  std::string runs_csv;
  std::string periods_csv;
};

int cmd_analyze(const KeyValueConfig& cfg, const AnalyzePaths& a, std::ostream& out) {
  ResolvedConfig echo;
  const MethodId method = method_from_string(a.method);
  put(echo, "method", to_string(method));
  const SeedSpec seed = read_seed(cfg, echo);
  const CsvReadOptions opts = read_csv_options(cfg, echo);
  MethodSettings settings = read_method_settings(cfg, false, echo);
  const TimeSeriesDataset ds = read_dataset_csv(a.data, opts);
  const SeedSpec method_seed = seed.child("analyze");

  json j{{"method", to_string(method)}, {"periods", ds.size()}};
  json model = nullptr;
  switch (method) {
    case MethodId::raw:
    case MethodId::coef: {
      const PointEstimate e = method == MethodId::raw ? estimate_raw(ds) : estimate_coef(ds);
      j["delta"] = e.estimate;
      j["ci"] = interval_json(e.ci);
      j["ci_degenerate"] = e.ci_degenerate;
      if (method == MethodId::coef) {
        model = fit_linear_outcome(assemble_features(ds, FeatureSpec::outcome_default())).summary();
      }
      break;
    }
    case MethodId::motr_glm:
    case MethodId::motr_rf: {
      const FeatureMatrix fm = assemble_features(ds, settings.outcome);
      ForestConfig fc = settings.forest;
      fc.seed = method_seed.child("forest");
      const FittedOutcomeModel fitted =
          method == MethodId::motr_glm ? fit_linear_outcome(fm) : fit_forest_outcome(fm, fc);
      MotrConfig mc = settings.motr;
      mc.seed = method_seed.child("motr");
      const ApteEstimate est = run_motr(ds, fitted, mc);
      j["delta"] = est.delta;
      j["ci"] = interval_json(est.ci);
      j["ci_degenerate"] = est.ci_degenerate;
      j["runs_used"] = est.runs_used;
      j["stopped_early"] = est.stopped_early;
      j["mean_po_1"] = est.mean_po_1;
      j["mean_po_0"] = est.mean_po_0;
      json traj = json::array();
      for (const auto& c : est.trajectory) {
        traj.push_back({{"r", c.r}, {"delta", c.delta}, {"lo", c.lo}, {"hi", c.hi}});
      }
      j["trajectory"] = traj;
      model = fitted.summary();
      if (!a.runs_csv.empty()) {
        auto f = open_output(a.runs_csv);
        echo.write_comments(f);
        f << "r,delta,lo,hi\n";
        for (const auto& r : est.runs) {
          f << r.r << ',' << format_double(r.delta) << ',' << format_double(r.lo) << ','
            << format_double(r.hi) << '\n';
        }
      }
      break;
    }
    case MethodId::pstn_glm:
    case MethodId::pstn_rf: {
      const FeatureMatrix fm = assemble_features(ds, settings.propensity);
      ForestConfig fc = settings.propensity_forest;
      fc.seed = method_seed.child("forest");
      const FittedPropensityModel fitted = method == MethodId::pstn_glm
                                               ? fit_logistic_propensity(fm, fm.x, settings.irls)
                                               : fit_forest_propensity(fm, fc);
      const PstnResult res = run_pstn(ds, fitted, settings.pstn);
      j["delta"] = res.delta;
      j["mean_po_1"] = res.mean_po_1;
      j["mean_po_0"] = res.mean_po_0;
      j["retained_count"] = res.retained.size();
      j["excluded"] = {{"trim", res.excluded_trim}, {"overlap", res.excluded_overlap}};
      j["overlap_region"] = interval_json(res.overlap_region);
      j["stabilization"] = {{"p1", res.share_1}, {"p0", res.share_0}};
      model = fitted.summary();
      if (!a.periods_csv.empty()) {
        auto f = open_output(a.periods_csv);
        echo.write_comments(f);
        f << "t,pi_hat,weight,retained\n";
        for (const auto& p : res.periods) {
          f << p.t << ',' << format_double(p.pi_hat) << ',' << format_double(p.weight) << ','
            << (p.retained ? 1 : 0) << '\n';
        }
      }
      break;
    }
  }
  j["model"] = model;
  j["config"] = echo_json(echo);
  if (!a.dump_model.empty()) emit_json(json{{"model", model}, {"config", echo_json(echo)}}, a.dump_model, out);
  emit_json(j, a.out, out);
  return exit_ok;
}

int cmd_replicate(const KeyValueConfig& cfg, const std::string& rows_path,
                  const std::string& summary_path, int workers, std::ostream& out) {
  ResolvedConfig echo;
  StudyConfig study;
  study.seed = read_seed(cfg, echo);
  study.params = read_arco(cfg, echo);
  study.propensity = read_propensity(cfg, echo);
  study.sim = read_sim(cfg, study.seed, echo);
  study.settings = read_method_settings(cfg, true, echo);
  study.datasets = read_int(cfg, echo, "datasets", 100);
  std::vector<std::string> names;
  for (MethodId m : all_methods) names.push_back(to_string(m));
  study.methods.clear();
  for (const auto& n : read_strings(cfg, echo, "methods", names)) {
    study.methods.push_back(method_from_string(n));
  }
  if (cfg.has("true_apte")) study.true_apte = cfg.get_double("true_apte", 0.0);
  put(echo, "true_apte", study.resolved_true_apte());
  // Worker count changes scheduling only, never results, so it is not echoed.
  study.workers = workers;

  const ReplicationReport report = replicate(study);
  if (rows_path.empty()) {
    write_rows_csv(out, report, echo);
  } else {
    auto f = open_output(rows_path);
    write_rows_csv(f, report, echo);
  }
  if (summary_path.empty()) {
    write_summary_csv(out, report, echo);
  } else {
    auto f = open_output(summary_path);
    write_summary_csv(f, report, echo);
  }
  return exit_ok;
}

int cmd_oracle(const KeyValueConfig& cfg, const std::string& out_path, std::ostream& out) {
  ResolvedConfig echo;
  const EnumSpec spec = read_enum_spec(cfg, echo);
  json j{{"mode", spec.mode_name()}, {"m", spec.m}, {"apte_exact", enumerate_apte(spec)}};
  if (const auto* iid = std::get_if<IidAssignment>(&spec.assignment)) {
    j["pi"] = iid->pi;
  } else {
    j["m1"] = std::get<PermutationAssignment>(spec.assignment).m1;
  }
  if (cfg.has("oracle_history")) {
    std::vector<int> history;
    for (double v : cfg.get_doubles("oracle_history")) {
      if (v != 0.0 && v != 1.0) throw ConfigError("oracle_history entries must be 0 or 1");
      history.push_back(static_cast<int>(v));
    }
    put(echo, "oracle_history", join(cfg.get_doubles("oracle_history")));
    j["hapte"] = historical_apte(spec, history);
  }
  const CapoTable capos = enumerate_capos(spec);
  j["capo1"] = capos.capo1;
  j["capo0"] = capos.capo0;
  j["config"] = echo_json(echo);
  emit_json(j, out_path, out);
  return exit_ok;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{
        "seed",
        // outcome mechanism
        "beta0", "betaX", "beta_co", "beta_Xco", "beta_ar", "beta_Xar", "beta_ex", "sigma_eps",
        // exposure mechanism
        "alpha0", "alpha_en", "alpha_ar", "alpha_ex", "pi1", "propensity_centering",
        "propensity_center", "exposure_rule",
        // simulation
        "m_analysis", "burn_in", "randomized", "randomized_pi",
        // input transforms
        "dichotomize", "log10_outcome",
        // features
        "outcome_lag", "exposure_lag1", "exog", "propensity_outcome_lag",
        "propensity_exposure_lag1", "propensity_exog",
        // MoTR
        "motr_r_min", "motr_r_max", "motr_stop_tol", "motr_stop_window",
        // PSTn
        "trim_lo", "trim_hi", "overlap", "stabilized", "forest_out_of_bag",
        // logistic
        "irls_max_iter", "irls_tol",
        // replication
        "datasets", "methods", "true_apte",
        // oracle
        "oracle_mode", "oracle_m", "oracle_m1", "oracle_pi", "oracle_init_y", "oracle_init_x",
        "oracle_order", "oracle_history"};
    for (const char* p : {"rf_", "prop_rf_"}) {
      for (const char* n : {"n_trees", "mtry", "min_node_size", "max_depth", "bootstrap"}) {
        k.push_back(std::string(p) + n);
      }
    }
    return k;
  }();
  return keys;
}

SeedSpec read_seed(const KeyValueConfig& cfg, ResolvedConfig& echo) {
  SeedSpec s;
  s.base_seed = cfg.get_u64("seed", s.base_seed);
  put(echo, "seed", std::to_string(s.base_seed));
  return s;
}

ArcoParams read_arco(const KeyValueConfig& cfg, ResolvedConfig& e) {
  const ArcoParams d = ArcoParams::study_default();
  ArcoParams p;
  p.beta0 = read_double(cfg, e, "beta0", d.beta0);
  p.betaX = read_double(cfg, e, "betaX", d.betaX);
  p.beta_co = read_double(cfg, e, "beta_co", d.beta_co);
  p.beta_Xco = read_double(cfg, e, "beta_Xco", d.beta_Xco);
  p.beta_ar = read_double(cfg, e, "beta_ar", d.beta_ar);
  p.beta_Xar = read_double(cfg, e, "beta_Xar", d.beta_Xar);
  p.beta_ex = read_doubles(cfg, e, "beta_ex");
  p.sigma_eps = read_double(cfg, e, "sigma_eps", d.sigma_eps);
  p.validate();
  return p;
}

PropensityParams read_propensity(const KeyValueConfig& cfg, ResolvedConfig& e) {
  const PropensityParams d = PropensityParams::study_default();
  PropensityParams q;
  q.alpha0 = read_double(cfg, e, "alpha0", d.alpha0);
  q.alpha_en = read_double(cfg, e, "alpha_en", d.alpha_en);
  q.alpha_ar = read_double(cfg, e, "alpha_ar", d.alpha_ar);
  q.alpha_ex = read_doubles(cfg, e, "alpha_ex");
  q.pi1 = read_double(cfg, e, "pi1", d.pi1);
  const std::string centering = read_string(cfg, e, "propensity_centering", "long_run_mean");
  if (centering == "none") {
    q.centering = PropensityCentering::none;
  } else if (centering == "long_run_mean") {
    q.centering = PropensityCentering::long_run_mean;
  } else if (centering == "fixed") {
    q.centering = PropensityCentering::fixed;
  } else {
    throw ConfigError("propensity_centering must be none|long_run_mean|fixed, got '" + centering + "'");
  }
  q.center_value = read_double(cfg, e, "propensity_center", 0.0);
  const std::string rule = read_string(cfg, e, "exposure_rule", "u_above_pi");
  if (rule == "u_above_pi") {
    q.rule = ExposureRule::u_above_pi;
  } else if (rule == "u_below_pi") {
    q.rule = ExposureRule::u_below_pi;
  } else {
    throw ConfigError("exposure_rule must be u_above_pi|u_below_pi, got '" + rule + "'");
  }
  q.validate();
  return q;
}

SimConfig read_sim(const KeyValueConfig& cfg, const SeedSpec& seed, ResolvedConfig& e) {
  SimConfig s;
  s.seed = seed;
  s.m_analysis = read_int(cfg, e, "m_analysis", s.m_analysis);
  s.burn_in = read_int(cfg, e, "burn_in", s.burn_in);
  s.randomized_mode = read_bool(cfg, e, "randomized", s.randomized_mode);
  s.randomized_pi = read_double(cfg, e, "randomized_pi", s.randomized_pi);
  s.validate();
  return s;
}

MethodSettings read_method_settings(const KeyValueConfig& cfg, bool harness_defaults,
                                    ResolvedConfig& e) {
  MethodSettings s;
  s.outcome = read_feature_spec(cfg, e, "", s.outcome, {});
  s.propensity = read_feature_spec(cfg, e, "propensity_", s.propensity, s.outcome.exog_names);
  s.motr.r_min = read_int(cfg, e, "motr_r_min", s.motr.r_min);
  s.motr.r_max = read_int(cfg, e, "motr_r_max", s.motr.r_max);
  s.motr.stop_tol = read_double(cfg, e, "motr_stop_tol", s.motr.stop_tol);
  s.motr.stop_window = read_int(cfg, e, "motr_stop_window", s.motr.stop_window);
  s.motr.validate();
  s.pstn.trim_lo = read_double(cfg, e, "trim_lo", s.pstn.trim_lo);
  s.pstn.trim_hi = read_double(cfg, e, "trim_hi", s.pstn.trim_hi);
  s.pstn.use_overlap = read_bool(cfg, e, "overlap", s.pstn.use_overlap);
  s.pstn.use_stabilized = read_bool(cfg, e, "stabilized", s.pstn.use_stabilized);
  s.pstn.forest_out_of_bag = read_bool(cfg, e, "forest_out_of_bag", s.pstn.forest_out_of_bag);
  s.pstn.validate();
  s.irls.max_iterations = read_int(cfg, e, "irls_max_iter", s.irls.max_iterations);
  s.irls.tolerance = read_double(cfg, e, "irls_tol", s.irls.tolerance);
  ForestConfig outcome_forest = s.forest;
  ForestConfig propensity_forest = s.propensity_forest;
  if (!harness_defaults) {
    outcome_forest.n_trees = 500;
    propensity_forest.n_trees = 500;
  }
  s.forest = read_forest(cfg, e, "rf_", outcome_forest);
  s.propensity_forest = read_forest(cfg, e, "prop_rf_", propensity_forest);
  return s;
}

CsvReadOptions read_csv_options(const KeyValueConfig& cfg, ResolvedConfig& e) {
  CsvReadOptions o;
  o.dichotomize = read_bool(cfg, e, "dichotomize", o.dichotomize);
  o.log10_outcome = read_bool(cfg, e, "log10_outcome", o.log10_outcome);
  return o;
}

EnumSpec read_enum_spec(const KeyValueConfig& cfg, ResolvedConfig& e) {
  EnumSpec spec;
  spec.params = read_arco(cfg, e);
  spec.m = read_int(cfg, e, "oracle_m", 8);
  const std::string mode = read_string(cfg, e, "oracle_mode", "permutation");
  if (mode == "permutation") {
    spec.assignment = PermutationAssignment{read_int(cfg, e, "oracle_m1", spec.m / 2)};
  } else if (mode == "iid") {
    spec.assignment = IidAssignment{read_double(cfg, e, "oracle_pi", 0.5)};
  } else {
    throw ConfigError("oracle_mode must be permutation|iid, got '" + mode + "'");
  }
  spec.init_y = read_double(cfg, e, "oracle_init_y", 0.0);
  spec.init_x = read_double(cfg, e, "oracle_init_x", 0.0);
  const std::string order = read_string(cfg, e, "oracle_order", "lexicographic");
  if (order == "lexicographic") {
    spec.order = EnumOrder::lexicographic;
  } else if (order == "reverse") {
    spec.order = EnumOrder::reverse;
  } else {
    throw ConfigError("oracle_order must be lexicographic|reverse, got '" + order + "'");
  }
  spec.validate();
  return spec;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal effect estimation for single-subject time series"};
  app.require_subcommand(1);

  CommonOptions sim_opts, an_opts, rep_opts, or_opts;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "simulate a dataset from the outcome/exposure mechanism");
  sim_opts.attach(sim);
  sim->add_option("--out,-o", sim_out, "output CSV path (default: stdout)");

  AnalyzePaths an;
  auto* ana = app.add_subcommand("analyze", "estimate the average period treatment effect of a dataset");
  an_opts.attach(ana);
  ana->add_option("--data,-d", an.data, "dataset CSV (t,y,x[,exog...])")->required();
  ana->add_option("--method,-m", an.method, "raw|coef|motr-glm|pstn-glm|motr-rf|pstn-rf")->required();
  ana->add_option("--out,-o", an.out, "output JSON path (default: stdout)");
  ana->add_option("--dump-model", an.dump_model, "write the fitted model summary as JSON");
  ana->add_option("--runs-csv", an.runs_csv, "per-run MoTR contrasts (MoTR methods)");
  ana->add_option("--periods-csv", an.periods_csv, "per-period weights (PSTn methods)");

  std::string rows_path, summary_path;
  int workers = 1;
  auto* rep = app.add_subcommand("replicate", "run the multi-dataset bias study");
  rep_opts.attach(rep);
  rep->add_option("--rows", rows_path, "per-dataset rows CSV (default: stdout)");
  rep->add_option("--summary", summary_path, "per-method summary CSV (default: stdout)");
  rep->add_option("--workers", workers, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  std::string or_out;
  auto* orc = app.add_subcommand("oracle", "exact APTE of a small noise-free system by enumeration");
  or_opts.attach(orc);
  orc->add_option("--out,-o", or_out, "output JSON path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts.resolve(), sim_out, out);
    if (ana->parsed()) return cmd_analyze(an_opts.resolve(), an, out);
    if (rep->parsed()) return cmd_replicate(rep_opts.resolve(), rows_path, summary_path, workers, out);
    if (orc->parsed()) return cmd_oracle(or_opts.resolve(), or_out, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return exit_data;
  } catch (const EstimatorError& e) {
    err << "estimator error: " << e.what() << "\n";
    return exit_estimator;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_failure;
}

}  // namespace nof1::cli
