#include "nof1/oracle.hpp"

#include <cmath>

#include "nof1/errors.hpp"

namespace nof1 {

namespace {

/// Neumaier-compensated accumulator: deterministic for a fixed visiting order
/// and accurate enough that visiting order does not matter at 1e-12.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

const std::vector<double>& exog_at(const EnumSpec& spec, int t) {
  static const std::vector<double> none;
  return spec.exog.empty() ? none : spec.exog[static_cast<std::size_t>(t)];
}

/// Depth-first walk over exposure prefixes. The outcome at period t only
/// depends on the prefix through t, so each node contributes
///   (probability mass of all sequences sharing the prefix) * Y_t
/// to the CAPO numerator of its exposure level at t.
class Enumerator {
 public:
  explicit Enumerator(const EnumSpec& spec)
      : spec_(spec),
        num_(2 * static_cast<std::size_t>(spec.m)),
        den_(2 * static_cast<std::size_t>(spec.m)) {
    if (const auto* iid = std::get_if<IidAssignment>(&spec.assignment)) {
      pi_ = iid->pi;
    } else {
      permutation_ = true;
      m1_ = std::get<PermutationAssignment>(spec.assignment).m1;
    }
  }

  CapoTable run() {
    visit(0, spec_.init_y, spec_.init_x, 1.0, 0);
    CapoTable out;
    for (int t = 0; t < spec_.m; ++t) {
      out.capo1.push_back(num_[slot(t, 1)].value() / den_[slot(t, 1)].value());
      out.capo0.push_back(num_[slot(t, 0)].value() / den_[slot(t, 0)].value());
    }
    return out;
  }

 private:
  std::size_t slot(int t, int s) const { return 2 * static_cast<std::size_t>(t) + static_cast<std::size_t>(s); }

  // Mass of the prefix extended by s at period t. In permutation mode `mass`
  // counts completions, so the uniform weight is implicit in the ratio.
  void visit(int t, double y_lag, double x_lag, double mass, int ones) {
    if (t == spec_.m) return;
    const int first = spec_.order == EnumOrder::lexicographic ? 0 : 1;
    for (int k = 0; k < 2; ++k) {
      const int s = k == 0 ? first : 1 - first;
      double w = 0.0;
      if (permutation_) {
        const int ones_after = ones + s;
        const int remaining = spec_.m - t - 1;
        const int need = m1_ - ones_after;
        if (need < 0 || need > remaining) continue;
        w = binomial(remaining, need);
      } else {
        w = mass * (s == 1 ? pi_ : 1.0 - pi_);
      }
      const double y = spec_.params.conditional_mean(s, x_lag, y_lag, exog_at(spec_, t));
      num_[slot(t, s)].add(w * y);
      den_[slot(t, s)].add(w);
      visit(t + 1, y, s, permutation_ ? 1.0 : w, ones + s);
    }
  }

  static double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return std::round(c);
  }

  const EnumSpec& spec_;
  bool permutation_ = false;
  double pi_ = 0.5;
  int m1_ = 0;
  std::vector<CompensatedSum> num_;
  std::vector<CompensatedSum> den_;
};

}  // namespace

void EnumSpec::validate() const {
  params.validate();
  if (m < 1) throw ConfigError("enumeration needs at least one period");
  if (const auto* iid = std::get_if<IidAssignment>(&assignment)) {
    if (m > max_iid_periods) {
      throw ConfigError("i.i.d. enumeration is capped at m = " + std::to_string(max_iid_periods) +
                        " (got " + std::to_string(m) + ")");
    }
    if (!(iid->pi > 0.0 && iid->pi < 1.0)) {
      throw ConfigError("i.i.d. enumeration needs 0 < pi < 1");
    }
  } else {
    const int m1 = std::get<PermutationAssignment>(assignment).m1;
    if (m > max_permutation_periods) {
      throw ConfigError("permutation enumeration is capped at m = " +
                        std::to_string(max_permutation_periods) + " (got " + std::to_string(m) + ")");
    }
    if (m1 < 1 || m1 >= m) throw ConfigError("permutation enumeration needs 1 <= m1 < m");
  }
  if (!exog.empty()) {
    if (exog.size() != static_cast<std::size_t>(m)) {
      throw ConfigError("enumeration exog needs one row per period");
    }
    for (const auto& row : exog) {
      if (row.size() != params.beta_ex.size()) {
        throw ConfigError("enumeration exog rows must match beta_ex in length");
      }
    }
  } else if (!params.beta_ex.empty()) {
    throw ConfigError("beta_ex given without exog rows");
  }
}

std::string EnumSpec::mode_name() const {
  return std::holds_alternative<IidAssignment>(assignment) ? "iid" : "permutation";
}

CapoTable enumerate_capos(const EnumSpec& spec) {
  spec.validate();
  return Enumerator(spec).run();
}

double enumerate_apte(const EnumSpec& spec) {
  const CapoTable capos = enumerate_capos(spec);
  double total = 0.0;
  for (std::size_t t = 0; t < capos.capo1.size(); ++t) total += capos.capo1[t] - capos.capo0[t];
  return total / static_cast<double>(capos.capo1.size());
}

double historical_apte(const EnumSpec& spec, const std::vector<int>& history) {
  spec.validate();
  if (history.size() != static_cast<std::size_t>(spec.m)) {
    throw ConfigError("history length " + std::to_string(history.size()) +
                      " does not match m = " + std::to_string(spec.m));
  }
  double y_lag = spec.init_y;
  double x_lag = spec.init_x;
  double total = 0.0;
  for (int t = 0; t < spec.m; ++t) {
    const auto& v = exog_at(spec, t);
    total += spec.params.conditional_mean(1, x_lag, y_lag, v) -
             spec.params.conditional_mean(0, x_lag, y_lag, v);
    const int s = history[static_cast<std::size_t>(t)];
    y_lag = spec.params.conditional_mean(s, x_lag, y_lag, v);
    x_lag = s;
  }
  return total / static_cast<double>(spec.m);
}

}  // namespace nof1
