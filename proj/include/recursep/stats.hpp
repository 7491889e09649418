#pragma once

#include <cstddef>
#include <vector>

namespace recursep {

// Standard normal CDF.
double normal_cdf(double z);

double mean(const std::vector<double>& x);

// Unbiased sample variance; 0 for fewer than two points.
double sample_variance(const std::vector<double>& x);

// Sample covariance with denominator n-1.
double sample_covariance(const std::vector<double>& x,
                         const std::vector<double>& y);

// Binomial standard error of a proportion.
double binomial_se(double rate, std::size_t n);

struct KsResult {
  double statistic;  // sup-norm distance D_n
  double p_value;    // asymptotic Kolmogorov p for sqrt(n) * D_n
};

// One-sample Kolmogorov-Smirnov test against the standard normal.
KsResult ks_test_standard_normal(std::vector<double> values);

}  // namespace recursep
