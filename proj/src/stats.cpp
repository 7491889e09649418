#include "recursep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace recursep {

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(n - 1);
}

double sample_covariance(const std::vector<double>& x,
                         const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::invalid_argument("covariance: length mismatch");
  if (n < 2) return 0.0;
  const double mx = mean(x);
  const double my = mean(y);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(n - 1);
}

double binomial_se(double rate, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(n));
}

namespace {

// P(K > x) for the Kolmogorov distribution, via the alternating series.
double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_test_standard_normal(std::vector<double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("ks test: empty sample");
  std::sort(values.begin(), values.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(values[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(f - lo, hi - f));
  }
  const double p = kolmogorov_survival(std::sqrt(static_cast<double>(n)) * d);
  return {d, p};
}

}  // namespace recursep
