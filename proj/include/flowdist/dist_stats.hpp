#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flowdist/flow_model.hpp"

namespace flowdist {

// Empirical distribution of a real-valued sample: sorted distinct support,
// multiplicity weights, and the original sample size.
class EmpiricalDistribution {
public:
    // Throws FlowdistError on an empty sample.
    static EmpiricalDistribution from_sample(std::span<const double> sample);

    // Fraction of mass <= x (right-continuous step function).
    double cdf(double x) const;

    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }
    // cumulative weights, same length as support; back() == 1
    const std::vector<double>& cumulative() const { return cumulative_; }
    std::size_t sample_size() const { return n_; }

private:
    std::vector<double> support_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    std::size_t n_ = 0;
};

inline EmpiricalDistribution ecdf(std::span<const double> sample) {
    return EmpiricalDistribution::from_sample(sample);
}

// Quantile by linear interpolation between closest order statistics
// (the common "type 7" rule). Input must be sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

struct BoxplotSummary {
    double mean = 0;
    double median = 0;
    double q1 = 0;
    double q3 = 0;
    double iqr = 0;
    double whisker_low = 0;   // most extreme data point >= q1 - 1.5*iqr
    double whisker_high = 0;  // most extreme data point <= q3 + 1.5*iqr
    double std_dev = 0;       // population normalization
};

// Throws FlowdistError on an empty sample.
BoxplotSummary boxplot_summary(std::span<const double> sample);

}  // namespace flowdist
