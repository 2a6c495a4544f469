#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gffsle::stats {

/// Welford accumulator; merge() is associative so per-thread partials can be combined.
class RunningStats {
 public:
  void push(double x);
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double std_error() const;  // of the mean

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);
double median(std::vector<double> xs);
double correlation(std::span<const double> xs, std::span<const double> ys);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

double normal_cdf(double x);

/// Two-sided p-value of the Kolmogorov distribution, P(K > x).
double kolmogorov_pvalue(double x);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 0.0;
};

/// One-sample KS test of the samples against N(0,1).
KsResult ks_test_normal(std::vector<double> samples);

/// Standardizes by the sample mean and deviation, then runs ks_test_normal.
KsResult ks_test_normal_standardized(std::span<const double> samples);

}  // namespace gffsle::stats
