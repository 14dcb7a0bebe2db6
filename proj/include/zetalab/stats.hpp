#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace zetalab {

/// Running mean/variance with Chan's pairwise merge.
struct MeanAccumulator {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }

  void merge(const MeanAccumulator &o) {
    if (o.count == 0.0)
      return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double n = count + o.count;
    const double d = o.mean - mean;
    mean += d * (o.count / n);
    m2 += o.m2 + d * d * (count * o.count / n);
    count = n;
  }

  double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  double stderr_of_mean() const {
    return count > 0.0 ? std::sqrt(variance() / count) : 0.0;
  }
};

/// Point estimate with a standard error.
struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
};

inline Estimate binomial_estimate(std::uint64_t hits, std::uint64_t n) {
  if (n == 0)
    return {0.0, 0.0};
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Kolmogorov-Smirnov sup-distance between the empirical law of `sample`
/// and a continuous CDF.
inline double ks_distance(std::vector<double> sample,
                          const std::function<double(double)> &cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return d;
}

} // namespace zetalab
