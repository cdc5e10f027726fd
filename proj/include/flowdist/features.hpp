#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowdist/flow_model.hpp"

namespace flowdist {

// A dataset ready for analysis: handle + records + what the source provided.
struct Dataset {
    DatasetHandle handle;
    std::vector<FlowRecord> records;
    bool has_l7_proto = true;
};

// Ordered multiset of values for one feature, drawn from one dataset.
struct FeatureSample {
    FeatureId feature = FeatureId::flow_duration;
    std::string dataset;
    std::vector<double> values;
    std::uint64_t skipped_degenerate = 0;
};

// --- per-flow features -------------------------------------------------

inline double flow_duration(const FlowRecord& r) {
    return static_cast<double>(r.last_switched - r.first_switched);
}

inline double flow_size_bytes(const FlowRecord& r) {
    return static_cast<double>(r.in_bytes) + static_cast<double>(r.out_bytes);
}

// nullopt marks a degenerate flow (zero packets); such flows are excluded
// from the sample and counted in skipped_degenerate.
inline std::optional<double> avg_packet_time(const FlowRecord& r) {
    const auto pkts = r.total_pkts();
    if (pkts == 0) return std::nullopt;
    return flow_duration(r) / static_cast<double>(pkts);
}

inline std::optional<double> avg_packet_size(const FlowRecord& r) {
    const auto pkts = r.total_pkts();
    if (pkts == 0) return std::nullopt;
    return flow_size_bytes(r) / static_cast<double>(pkts);
}

// --- grouped distinct counts --------------------------------------------

// The key fields grouped features draw on.
enum class FlowField : std::uint8_t { src_ip, dst_ip, src_port, dst_port, l7_proto };

// Opaque byte key of a field value; equal keys iff equal field values.
std::string field_key(const FlowRecord& record, FlowField field);

// group key field and counted field of a grouped feature
struct GroupSpec {
    FlowField group_by;
    FlowField counted;
};
GroupSpec grouped_feature_spec(FeatureId id);

// Per distinct group-key value, the number of distinct counted values seen
// with it. Keys ordered bytewise, so output order is input-order independent.
std::map<std::string, std::uint64_t> group_distinct_table(std::span<const FlowRecord> records,
                                                          FlowField group_by, FlowField counted);

// One count per group key, in group-key order.
std::vector<double> group_distinct_count(std::span<const FlowRecord> records, FlowField group_by,
                                         FlowField counted);

// --- dispatch -------------------------------------------------------------

// Computes one of the nine features over a benign-only dataset.
// Throws FlowdistError if the dataset is not benign-only or the feature
// needs the absent l7_proto column.
FeatureSample extract_feature(const Dataset& dataset, FeatureId feature);

// One 9-component vector per non-degenerate flow; grouped components are the
// counts of the flow's own keys. Requires l7_proto availability.
std::vector<FeatureVector> build_feature_vectors(const Dataset& dataset);

}  // namespace flowdist
