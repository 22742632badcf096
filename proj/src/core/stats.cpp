#include "nof1/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "nof1/errors.hpp"

namespace nof1 {

double mean(std::span<const double> v) {
  if (v.empty()) throw DataError("mean of empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v, int ddof) {
  const auto n = static_cast<long>(v.size());
  if (n - ddof <= 0) throw DataError("too few values for a standard deviation");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - ddof));
}

namespace {

double sorted_median(std::span<const double> s) {
  const std::size_t n = s.size();
  if (n % 2 == 1) return s[n / 2];
  return 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

double median(std::span<const double> v) {
  if (v.empty()) throw DataError("median of empty sample");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return sorted_median(s);
}

Quartiles order_statistic_quartiles(std::span<const double> v) {
  if (v.size() < 2) throw DataError("quartiles need at least 2 values");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t half = s.size() / 2;
  const std::span<const double> all(s);
  return Quartiles{sorted_median(all.first(half)), sorted_median(all),
                   sorted_median(all.last(half))};
}

double t_critical(double df, double level) {
  const boost::math::students_t dist(df);
  return boost::math::quantile(dist, 0.5 + level / 2.0);
}

WelchResult welch_interval(std::span<const double> a, std::span<const double> b,
                           double level) {
  WelchResult out;
  out.difference = mean(a) - mean(b);
  out.ci = {out.difference, out.difference};
  if (a.size() < 2 || b.size() < 2) {
    out.degenerate = true;
    return out;
  }
  const double va = std::pow(sample_sd(a), 2) / static_cast<double>(a.size());
  const double vb = std::pow(sample_sd(b), 2) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (!(se2 > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.df = se2 * se2 /
           (va * va / static_cast<double>(a.size() - 1) +
            vb * vb / static_cast<double>(b.size() - 1));
  const double half = t_critical(out.df, level) * std::sqrt(se2);
  out.ci = {out.difference - half, out.difference + half};
  return out;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

}  // namespace nof1
