#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "flowdist/flow_model.hpp"

namespace flowdist {

enum class EmbedMethod : std::uint8_t { pca, lda, mds, spectral };

std::string_view embed_method_name(EmbedMethod method);
std::optional<EmbedMethod> embed_method_from_name(std::string_view name);

// Component-wise standardization of pooled feature vectors: mean 0, variance 1
// (population); constant components are left at 0 and recorded with scale 0.
struct StandardizedVectors {
    std::vector<std::array<double, kFeatureCount>> values;
    std::vector<std::string> labels;  // dataset name per vector
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> scale{};
};

// Throws FlowdistError with fewer than 2 vectors.
StandardizedVectors standardize(const std::vector<FeatureVector>& vectors);

// 2-D embedding of the pooled vectors. points[i] belongs to labels[i].
// eigenvalues: pca = all spectrum values descending (explained variance);
// lda = discriminability ratios; mds = positive Gram eigenvalues descending;
// spectral = the smallest Laplacian eigenvalues ascending (trivial one first).
struct EmbeddingResult {
    EmbedMethod method = EmbedMethod::pca;
    std::vector<std::array<double, 2>> points;
    std::vector<std::string> labels;
    std::vector<double> eigenvalues;
    std::map<std::string, std::string> notes;
};

// Projection onto the two leading covariance eigenvectors. Deterministic sign
// convention: the first nonzero loading of each eigenvector is positive.
// Throws "insufficient variance" when the data has rank < 2.
EmbeddingResult pca_2d(const StandardizedVectors& input);

// Fisher discriminant projection using the vector labels as classes. With two
// classes only one discriminant exists; the second coordinate is the leading
// principal direction of the residual, flagged in notes.
EmbeddingResult lda_2d(const StandardizedVectors& input);

// Classical (Torgerson) MDS. Computed through the centered Gram matrix, which
// factors the double-centered squared-distance matrix exactly for vector
// input; reflections fixed by the pca sign convention.
EmbeddingResult mds_2d(const StandardizedVectors& input);

// Symmetric k-nearest-neighbor graph with unit weights; coordinates are the
// eigenvectors of the 2nd and 3rd smallest eigenvalues of the symmetric
// normalized Laplacian. Throws if the graph is disconnected.
EmbeddingResult spectral_2d(const StandardizedVectors& input, int k_neighbors);

}  // namespace flowdist
