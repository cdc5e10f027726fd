#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "flowdist/flow_model.hpp"
#include "flowdist/util.hpp"

namespace flowdist {

enum class TimestampEncoding : std::uint8_t {
    epoch_ms,      // absolute milliseconds
    epoch_s,       // absolute seconds (possibly fractional)
    sysuptime_ms,  // exporter-uptime-relative ms, kept verbatim
};

std::string_view timestamp_encoding_name(TimestampEncoding enc);
std::optional<TimestampEncoding> timestamp_encoding_from_name(std::string_view name);

struct LabelRule {
    std::string column;
    std::set<std::string> benign_values;
};

// Maps FlowRecord fields onto the column names of one source layout.
// l7_proto and label may be absent: a missing l7_proto column disables the
// l7_protos_per_dst_port feature, a missing label marks records unlabeled.
struct SchemaProfile {
    std::string name;
    TimestampEncoding timestamp_encoding = TimestampEncoding::epoch_ms;

    std::string first_switched;
    std::string last_switched;
    std::string in_bytes;
    std::string out_bytes;
    std::string in_pkts;
    std::string out_pkts;
    std::string src_ip;
    std::string dst_ip;
    std::string src_port;
    std::string dst_port;
    std::string l4_proto;
    std::string l7_proto;  // optional: empty = column absent

    std::optional<LabelRule> label_rule;

    bool has_l7() const { return !l7_proto.empty(); }

    // Throws FlowdistError if a mandatory mapping is missing.
    void check_complete() const;

    // Built-in profiles: "canonical" (this toolkit's normalized output),
    // "nprobe-v9" (nprobe text export naming), "nfv2" (NetFlow-converted
    // NIDS dataset naming). Unknown names return nullopt.
    static std::optional<SchemaProfile> builtin(std::string_view name);
    static std::vector<std::string> builtin_names();

    // key=value profile files; see README for the format.
    static SchemaProfile load(const std::string& path);
};

struct RejectedRow {
    std::uint64_t line_no = 0;  // 1-based, header is line 1
    std::string reason;
};

struct ParseReport {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t degenerate = 0;  // accepted flows with zero total packets
    std::vector<RejectedRow> reject_details;  // first kMaxRejectDetails only

    static constexpr std::size_t kMaxRejectDetails = 100;
};

struct ParsedFlows {
    std::vector<FlowRecord> records;
    ParseReport report;
};

// Parses a header-named delimited text stream (comma or tab, auto-detected).
// Malformed rows are skipped and counted; a missing mandatory column is fatal.
ParsedFlows parse_flows(std::istream& source, const SchemaProfile& profile);
ParsedFlows parse_flows_file(const std::string& path, const SchemaProfile& profile);

// Writes records with canonical column names in FlowRecord field order;
// parse_flows with the "canonical" profile round-trips all field values.
void write_normalized(std::ostream& out, std::span<const FlowRecord> records);

// Keeps benign records only. Requires a label rule on the profile, or the
// caller's assertion that the source is already benign-only; marks the handle.
std::vector<FlowRecord> filter_benign(std::vector<FlowRecord> records, const SchemaProfile& profile,
                                      bool caller_asserts_benign, DatasetHandle& handle);

// Groups records by the UTC calendar day of first_switched ("YYYY-MM-DD").
// Input order is preserved within each group.
std::map<std::string, std::vector<FlowRecord>> split_by_day(std::span<const FlowRecord> records);

// Uniform reservoir sample of n elements without replacement (Algorithm R),
// deterministic for a fixed seed. Shorter inputs are returned whole.
template <typename T>
std::vector<T> sample_reservoir(std::span<const T> stream, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw FlowdistError("sample_reservoir: n must be >= 1");
    std::vector<T> reservoir;
    reservoir.reserve(std::min(n, stream.size()));
    std::mt19937_64 gen(seed);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (i < n) {
            reservoir.push_back(stream[i]);
        } else {
            const std::uint64_t j = rng::below(gen, i + 1);
            if (j < n) reservoir[j] = stream[i];
        }
    }
    return reservoir;
}

template <typename T>
std::vector<T> sample_reservoir(const std::vector<T>& stream, std::size_t n, std::uint64_t seed) {
    return sample_reservoir(std::span<const T>(stream), n, seed);
}

}  // namespace flowdist
