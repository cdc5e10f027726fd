#include "flowdist/dist_stats.hpp"

#include <algorithm>
#include <cmath>

namespace flowdist {

EmpiricalDistribution EmpiricalDistribution::from_sample(std::span<const double> sample) {
    if (sample.empty()) throw FlowdistError("ecdf: empty sample");

    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());

    EmpiricalDistribution dist;
    dist.n_ = sorted.size();
    const double n = static_cast<double>(dist.n_);

    std::size_t i = 0;
    std::size_t cum_count = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        cum_count += j - i;
        dist.support_.push_back(sorted[i]);
        dist.weights_.push_back(static_cast<double>(j - i) / n);
        dist.cumulative_.push_back(static_cast<double>(cum_count) / n);
        i = j;
    }
    return dist;
}

double EmpiricalDistribution::cdf(double x) const {
    const auto it = std::upper_bound(support_.begin(), support_.end(), x);
    if (it == support_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw FlowdistError("quantile: empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

BoxplotSummary boxplot_summary(std::span<const double> sample) {
    if (sample.empty()) throw FlowdistError("boxplot_summary: empty sample");

    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    BoxplotSummary s;
    long double sum = 0;
    for (const double v : sorted) sum += v;
    s.mean = static_cast<double>(sum / n);

    long double var = 0;
    for (const double v : sorted) {
        const long double d = v - s.mean;
        var += d * d;
    }
    s.std_dev = static_cast<double>(std::sqrt(static_cast<double>(var / n)));

    s.median = quantile_sorted(sorted, 0.5);
    s.q1 = quantile_sorted(sorted, 0.25);
    s.q3 = quantile_sorted(sorted, 0.75);
    s.iqr = s.q3 - s.q1;

    // whiskers sit on actual data points within the 1.5*IQR fences
    const double lo_fence = s.q1 - 1.5 * s.iqr;
    const double hi_fence = s.q3 + 1.5 * s.iqr;
    s.whisker_low = s.q1;
    s.whisker_high = s.q3;
    for (const double v : sorted) {
        if (v >= lo_fence) {
            s.whisker_low = v;
            break;
        }
    }
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        if (*it <= hi_fence) {
            s.whisker_high = *it;
            break;
        }
    }
    return s;
}

}  // namespace flowdist
