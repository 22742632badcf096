#pragma once

#include <span>
#include <vector>

namespace nof1 {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool covers(double v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

double mean(std::span<const double> v);

/// Sample standard deviation with denominator n - ddof.
double sample_sd(std::span<const double> v, int ddof = 1);

/// Average of the two central order statistics for even n.
double median(std::span<const double> v);

/// Median-of-halves (Tukey-style) quartiles. For odd n the middle order
/// statistic is excluded from both halves. Requires n >= 2.
struct Quartiles {
  double q1, q2, q3;
};
Quartiles order_statistic_quartiles(std::span<const double> v);

/// Two-sided Student t critical value for the given confidence level.
double t_critical(double df, double level = 0.95);

struct WelchResult {
  double difference = 0.0;  // mean(a) - mean(b)
  Interval ci;
  double df = 0.0;
  bool degenerate = false;  // fewer than 2 values per arm or zero spread
};

/// Welch two-sample t interval for mean(a) - mean(b).
WelchResult welch_interval(std::span<const double> a, std::span<const double> b,
                           double level = 0.95);

/// Pairwise summation, reproducible for a fixed element order.
double pairwise_sum(std::span<const double> v);

}  // namespace nof1
