#include "cvqkd/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cvqkd/error.hpp"

namespace cvqkd::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    // 2 Σ (-1)^{j-1} exp(-2 j² λ²)
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
    require(!samples.empty(), ErrorKind::InvalidArgument, "ks_test: no samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
    }
    const double sn = std::sqrt(n);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    return r;
}

double mean(std::span<const double> xs) {
    require(!xs.empty(), ErrorKind::InvalidArgument, "mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double covariance(std::span<const double> xs, std::span<const double> ys) {
    require(xs.size() == ys.size() && xs.size() > 1, ErrorKind::InvalidArgument,
            "covariance: need two samples of equal length > 1");
    const double mx = mean(xs);
    const double my = mean(ys);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (xs[i] - mx) * (ys[i] - my);
    return s / static_cast<double>(xs.size() - 1);
}

double variance(std::span<const double> xs) { return covariance(xs, xs); }

double correlation(std::span<const double> xs, std::span<const double> ys) {
    const double vx = variance(xs);
    const double vy = variance(ys);
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return covariance(xs, ys) / std::sqrt(vx * vy);
}

}  // namespace cvqkd::stats
