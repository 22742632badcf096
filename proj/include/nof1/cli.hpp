#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nof1/arco.hpp"
#include "nof1/config.hpp"
#include "nof1/harness.hpp"
#include "nof1/oracle.hpp"

namespace nof1::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_estimator = 4;

/// Every key accepted in a config file or by --set.
const std::vector<std::string>& known_keys();

// Key readers. Each records the values it resolved (defaults included) in
// `echo`, in a stable order, so outputs can state exactly what ran.
SeedSpec read_seed(const KeyValueConfig& cfg, ResolvedConfig& echo);
ArcoParams read_arco(const KeyValueConfig& cfg, ResolvedConfig& echo);
PropensityParams read_propensity(const KeyValueConfig& cfg, ResolvedConfig& echo);
SimConfig read_sim(const KeyValueConfig& cfg, const SeedSpec& seed, ResolvedConfig& echo);
/// `harness_defaults` selects the replication forest size (100 trees) over
/// the single-analysis size (500).
MethodSettings read_method_settings(const KeyValueConfig& cfg, bool harness_defaults,
                                    ResolvedConfig& echo);
CsvReadOptions read_csv_options(const KeyValueConfig& cfg, ResolvedConfig& echo);
EnumSpec read_enum_spec(const KeyValueConfig& cfg, ResolvedConfig& echo);

/// Entry point: returns the process exit code. Diagnostics go to `err`;
/// outputs without an explicit path go to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nof1::cli
