#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace adjwalk::stats {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF. Sorts a copy of the sample.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample KS test.
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

struct Interval {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Wilson score interval for a binomial proportion (z = 1.96 gives 95%).
Interval wilson(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double variance = 0.0;
};

MeanSe mean_se(std::span<const double> values);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit ols(std::span<const double> x, std::span<const double> y);

// Linear-interpolated quantile of an unsorted sample, q in [0,1].
double quantile(std::vector<double> values, double q);

}  // namespace adjwalk::stats
