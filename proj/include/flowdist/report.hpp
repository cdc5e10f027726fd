#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowdist/dist_stats.hpp"
#include "flowdist/embed.hpp"
#include "flowdist/features.hpp"
#include "flowdist/ingest.hpp"
#include "flowdist/metrics.hpp"

namespace flowdist {

enum class NormalizeMode : std::uint8_t { minmax, none };

std::string_view normalize_mode_name(NormalizeMode mode);
std::optional<NormalizeMode> normalize_mode_from_name(std::string_view name);

struct DatasetSpec {
    std::string name;
    std::string path;
    std::string profile;  // builtin profile name or profile file path
    DatasetKind kind = DatasetKind::synthetic;
    bool assert_benign = false;  // source attested benign-only (no label rule)
};

struct RunConfig {
    std::vector<DatasetSpec> datasets;
    std::size_t sample_size = 50'000;
    std::uint64_t seed = 42;
    std::vector<FeatureId> features{all_features().begin(), all_features().end()};
    NormalizeMode normalize = NormalizeMode::minmax;
    std::vector<EmbedMethod> embed_methods{EmbedMethod::pca, EmbedMethod::lda, EmbedMethod::mds,
                                           EmbedMethod::spectral};
    std::size_t embed_sample = 2'000;
    int spectral_k = 10;
    bool pca_distance = false;  // also emit W1 over shared PCA components
    std::string ref1, ref2;     // scatter references; default: the two real_world datasets
    std::string out_dir = "report";
    bool write_json = true;  // provenance.json is always written
    bool write_csv = true;
    bool write_svg = true;

    // Throws FlowdistError when structurally invalid (duplicate names,
    // missing paths, unknown refs, fewer than 2 datasets).
    void check() const;

    // Canonical text form used for the provenance hash. Excludes the output
    // location and format toggles so identical analyses hash identically.
    std::string canonical_string() const;
};

// Sectioned key=value config file; see README for the format.
RunConfig load_config(const std::string& path);

// Pipeline failures carry the failing stage and dataset.
struct StageError : FlowdistError {
    std::string stage;
    std::string dataset;  // empty for cross-dataset stages

    StageError(std::string stage_name, std::string dataset_name, const std::string& message)
        : FlowdistError(message), stage(std::move(stage_name)), dataset(std::move(dataset_name)) {}
};

struct FeatureStats {
    std::size_t n = 0;
    std::uint64_t skipped_degenerate = 0;
    BoxplotSummary overall;
    std::map<std::string, BoxplotSummary> per_day;  // "YYYY-MM-DD" -> summary
};

struct DatasetResult {
    DatasetSpec spec;
    DatasetHandle handle;
    ParseReport parse_report;
    bool has_l7 = true;
    std::uint64_t benign_flows = 0;
    std::size_t sampled = 0;
    std::map<FeatureId, FeatureSample> samples;  // raw values
    std::map<FeatureId, FeatureStats> stats;
    std::vector<FeatureVector> embed_vectors;  // seeded subsample
};

struct ReportBundle {
    RunConfig config;
    std::uint64_t config_hash = 0;
    std::vector<DatasetResult> datasets;
    std::vector<FeatureId> active_features;  // after availability drops
    std::vector<std::string> dropped_features;
    std::map<std::string, MinMaxRange> normalization;  // feature name -> range used
    std::vector<DistanceMatrix> per_feature;           // normalized per config
    std::optional<DistanceMatrix> averaged;
    std::map<std::string, KruskalWallisResult> kruskal;  // feature name -> result
    std::optional<ScatterCoordinates> scatter;
    std::vector<EmbeddingResult> embeddings;
    std::vector<DistanceMatrix> pca_component_matrices;
    std::optional<DistanceMatrix> pca_averaged;
    std::optional<ScatterCoordinates> pca_scatter;
    std::vector<std::string> warnings;
};

// Runs ingest -> filter -> sample -> features -> stats -> metrics -> embed.
// Deterministic for fixed config + inputs. Throws StageError on failure.
ReportBundle run_pipeline(const RunConfig& config);

// ingest -> filter -> sample -> features for one dataset, no comparisons.
DatasetResult process_single_dataset(const DatasetSpec& spec, const RunConfig& config);

// Writes the artifact tree under config.out_dir: everything is staged in a
// scratch directory and atomically renamed into place, so failed runs leave
// no partial outputs.
void write_bundle(const ReportBundle& bundle);

// {feature, dataset, unit, values[], skipped_degenerate} as JSON text.
std::string feature_sample_json(const FeatureSample& sample);

}  // namespace flowdist
