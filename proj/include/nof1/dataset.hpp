#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nof1 {

struct PeriodRecord {
  int t = 0;
  double y = 0.0;
  int x = 0;                  // binary exposure
  std::vector<double> exog;   // aligned with TimeSeriesDataset::exog_names
};

/// Ordered single-subject series. Periods are indexed 1..m without gaps.
struct TimeSeriesDataset {
  std::vector<std::string> exog_names;
  std::vector<PeriodRecord> periods;
  int burn_in_dropped = 0;

  std::size_t size() const { return periods.size(); }
  std::vector<double> outcomes() const;
  std::vector<int> exposures() const;
  std::size_t exog_index(const std::string& name) const;  // throws DataError

  /// Throws DataError when an invariant is broken.
  void validate() const;
};

/// Builds a dataset from parallel vectors; t runs 1..n.
TimeSeriesDataset make_dataset(const std::vector<double>& y, const std::vector<int>& x);

/// Result of dichotomize_exposure: x_i = 1 iff value_i > threshold (the median).
struct Dichotomized {
  std::vector<int> binary;
  double threshold = 0.0;
};
Dichotomized dichotomize_exposure(const std::vector<double>& values);

std::vector<double> log10_transform(const std::vector<double>& values);

struct CsvReadOptions {
  bool dichotomize = false;     // continuous x column -> median split
  bool log10_outcome = false;
};

/// Reads `t,y,x[,exog...]`. Lines beginning with '#' are comments. Errors
/// carry 1-based line numbers.
TimeSeriesDataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts = {});
TimeSeriesDataset read_dataset_csv(const std::string& path, const CsvReadOptions& opts = {});

void write_dataset_csv(std::ostream& out, const TimeSeriesDataset& ds);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace nof1
