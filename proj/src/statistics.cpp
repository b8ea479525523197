#include "hazlab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hazlab/errors.hpp"

namespace hazlab {
namespace {

struct Central {
  double mean, var_unbiased, skew, kurt;
};

// Moments from power sums of values already shifted by `shift`.
Central from_sums(double n, double s1, double s2, double s3, double s4) {
  const double m = s1 / n;
  const double r2 = s2 / n, r3 = s3 / n, r4 = s4 / n;
  const double c2 = std::max(r2 - m * m, 0.0);
  const double c3 = r3 - 3.0 * m * r2 + 2.0 * m * m * m;
  const double c4 = r4 - 4.0 * m * r3 + 6.0 * m * m * r2 - 3.0 * m * m * m * m;
  Central c;
  c.mean = m;
  c.var_unbiased = c2 * n / (n - 1.0);
  c.skew = c2 > 0.0 ? c3 / std::pow(c2, 1.5) : 0.0;
  c.kurt = c2 > 0.0 ? c4 / (c2 * c2) - 3.0 : 0.0;
  return c;
}

}  // namespace

double normal_cdf(double x, double mean, double variance) {
  if (!(variance > 0.0)) return x < mean ? 0.0 : 1.0;
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double ks_distance_normal(std::span<const double> samples, double mean, double variance) {
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = normal_cdf(x[i], mean, variance);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

SampleSummary summarize(std::span<const double> samples, double reference_mean,
                        double reference_variance) {
  const std::size_t n = samples.size();
  if (n < 2) throw InsufficientSampleError("summarize needs at least two samples");
  const double shift = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (double v : samples) {
    const double d = v - shift, d2 = d * d;
    s1 += d;
    s2 += d2;
    s3 += d2 * d;
    s4 += d2 * d2;
  }
  const double nn = static_cast<double>(n);
  Central full = from_sums(nn, s1, s2, s3, s4);
  SampleSummary out;
  out.count = n;
  out.mean = full.mean + shift;
  out.variance = full.var_unbiased;
  out.skewness = full.skew;
  out.excess_kurtosis = full.kurt;
  out.reference_mean = reference_mean;
  out.reference_variance = reference_variance;
  out.ks_distance = ks_distance_normal(samples, reference_mean, reference_variance);

  // Leave-one-out jackknife.
  if (n >= 3) {
    std::vector<Central> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = samples[i] - shift, d2 = d * d;
      loo[i] = from_sums(nn - 1.0, s1 - d, s2 - d2, s3 - d2 * d, s4 - d2 * d2);
    }
    auto se = [&](auto get) {
      double mean = 0.0;
      for (const auto& c : loo) mean += get(c);
      mean /= nn;
      double ss = 0.0;
      for (const auto& c : loo) ss += (get(c) - mean) * (get(c) - mean);
      return std::sqrt((nn - 1.0) / nn * ss);
    };
    out.se_mean = se([](const Central& c) { return c.mean; });
    out.se_variance = se([](const Central& c) { return c.var_unbiased; });
    out.se_skewness = se([](const Central& c) { return c.skew; });
    out.se_kurtosis = se([](const Central& c) { return c.kurt; });
  } else {
    out.se_mean = std::sqrt(out.variance / nn);
  }
  return out;
}

double kolmogorov_survival(double x) {
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsTest ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InsufficientSampleError("two-sample KS needs data");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  KsTest t;
  t.statistic = d;
  const double ne = std::sqrt(n * m / (n + m));
  t.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
  return t;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("least_squares needs equally long inputs");
  if (x.size() < 2) throw InsufficientSampleError("least_squares needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace hazlab
