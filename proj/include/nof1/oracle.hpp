#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nof1/arco.hpp"

namespace nof1 {

/// Every period's exposure is an independent Bernoulli(pi) draw.
struct IidAssignment {
  double pi = 0.5;
};

/// Exposure sequences are uniform over the arrangements with exactly m1 ones,
/// the distribution a MoTR permutation draws from.
struct PermutationAssignment {
  int m1 = 0;
};

enum class EnumOrder { lexicographic, reverse };

/// A small noise-free linear ARCO system to enumerate. Periods 1..m are the
/// generated periods; init_y and init_x are the pre-sample lags that feed
/// period 1 (the same role as InitialConditions in MoTR).
struct EnumSpec {
  int m = 8;
  std::variant<IidAssignment, PermutationAssignment> assignment = PermutationAssignment{4};
  ArcoParams params;                      // sigma_eps is ignored
  std::vector<std::vector<double>> exog;  // empty, or one row per period
  double init_y = 0.0;
  double init_x = 0.0;
  EnumOrder order = EnumOrder::lexicographic;

  static constexpr int max_iid_periods = 20;
  static constexpr int max_permutation_periods = 12;

  void validate() const;
  std::string mode_name() const;  // "iid" or "permutation"
};

/// Contemporaneous average potential outcomes for each period.
struct CapoTable {
  std::vector<double> capo1;
  std::vector<double> capo0;
};

CapoTable enumerate_capos(const EnumSpec& spec);

/// Mean over periods of CAPO(1) - CAPO(0).
double enumerate_apte(const EnumSpec& spec);

/// Mean over periods of the effect of switching X_t alone, holding the given
/// exposure history (and the outcomes it produces) fixed.
double historical_apte(const EnumSpec& spec, const std::vector<int>& history);

}  // namespace nof1
