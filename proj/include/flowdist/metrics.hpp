#pragma once

#include <span>
#include <string>
#include <vector>

#include "flowdist/features.hpp"

namespace flowdist {

// Symmetric labeled matrix of inter-dataset distances, per feature or
// feature-averaged ("averaged", "pca_component_1", ...).
struct DistanceMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> entries;
    std::string feature;

    double at(std::size_t i, std::size_t j) const { return entries[i][j]; }
};

// Exact 1-D Wasserstein distance between two empirical samples: the integral
// of |U - V| evaluated piecewise on the sorted union of sample values.
// Throws FlowdistError on an empty sample.
double wasserstein_1d(std::span<const double> u, std::span<const double> v);

struct MinMaxRange {
    double min = 0;
    double max = 0;
    bool degenerate = false;  // constant union: everything rescales to 0
};

// Min-max rescaling to [0,1] over the union of all datasets' samples for one
// feature, so per-feature distances become commensurable for averaging.
MinMaxRange normalize_features(std::vector<FeatureSample>& samples);

// Pairwise W1 between the datasets' samples (callers normalize first when
// averaging across features). Throws when a sample is empty, naming it.
DistanceMatrix pairwise_distance_matrix(const std::vector<FeatureSample>& datasets, FeatureId feature);

// Entrywise arithmetic mean of per-feature matrices sharing labels.
DistanceMatrix averaged_distance_matrix(const std::vector<DistanceMatrix>& per_feature);

// Each dataset plotted at (distance to ref1, distance to ref2); the
// references land on the axes.
struct ScatterCoordinates {
    std::string ref1;
    std::string ref2;
    std::vector<std::string> labels;
    std::vector<std::array<double, 2>> coords;
};

ScatterCoordinates reference_scatter(const DistanceMatrix& averaged, const std::string& ref1,
                                     const std::string& ref2);

struct KruskalWallisResult {
    double h_statistic = 0;
    double p_value = 1;
    std::size_t df = 0;
    double tie_correction = 1;
};

// Rank-based test that the groups come from one distribution: H on midranks
// with tie correction, p-value from the chi-squared upper tail with k-1
// degrees of freedom. Throws when all values are identical.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Upper tail of the chi-squared distribution (regularized incomplete gamma).
double chi_squared_sf(double x, double degrees_of_freedom);

// Pairwise W1 between per-dataset samples of one shared principal-component
// score (component is 1 or 2), PCA fitted on the pooled standardized vectors.
DistanceMatrix wasserstein_over_pca(const std::vector<std::vector<FeatureVector>>& datasets,
                                    const std::vector<std::string>& labels, int component);

}  // namespace flowdist
