#pragma once

#include <cstddef>
#include <span>

namespace hazlab {

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_distance = 0.0;  // against N(reference_mean, reference_variance)
  double reference_mean = 0.0;
  double reference_variance = 1.0;
  // jackknife standard errors
  double se_mean = 0.0;
  double se_variance = 0.0;
  double se_skewness = 0.0;
  double se_kurtosis = 0.0;
};

// Throws InsufficientSampleError for fewer than two samples.
SampleSummary summarize(std::span<const double> samples, double reference_mean = 0.0,
                        double reference_variance = 1.0);

double normal_cdf(double x, double mean, double variance);
double ks_distance_normal(std::span<const double> samples, double mean, double variance);

struct KsTest {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsTest ks_two_sample(std::span<const double> a, std::span<const double> b);
// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace hazlab
