#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cvqkd::stats {

double normal_cdf(double x);

// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda);

struct KsResult {
    double statistic = 0.0;  // sup |F_n - F|
    double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test of `samples` against `cdf`.
// Uses Stephens' finite-n correction of the asymptotic law.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased, mean subtracted
double covariance(std::span<const double> xs, std::span<const double> ys);
double correlation(std::span<const double> xs, std::span<const double> ys);

}  // namespace cvqkd::stats
