#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace flowdist {

// Base error type for the toolkit. Fatal configuration and data errors throw
// this; row-level parse problems are counted, not thrown.
struct FlowdistError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One IPv4 or IPv6 address. Grouped-count features treat addresses as opaque
// keys, so the two families share one type; v4 occupies the first 4 bytes.
class IpAddress {
public:
    IpAddress() = default;

    // Accepts dotted-quad v4, RFC-4291 v6 text, or a bare decimal u32
    // (some flow exports dump v4 addresses as integers).
    static std::optional<IpAddress> parse(std::string_view text);
    static IpAddress from_v4(std::uint32_t host_order);

    bool is_v6() const { return v6_; }
    std::string to_string() const;

    // Compact byte key for grouping and hashing: family byte + address bytes.
    std::string key() const;

    friend bool operator==(const IpAddress&, const IpAddress&) = default;
    friend auto operator<=>(const IpAddress&, const IpAddress&) = default;

private:
    std::array<std::uint8_t, 16> bytes_{};
    bool v6_ = false;
};

enum class FlowLabel : std::uint8_t { benign, attack, unlabeled };

std::string_view label_name(FlowLabel label);
std::optional<FlowLabel> label_from_name(std::string_view name);

// One bidirectional flow, NetFlow-v9 style. Timestamps are absolute
// milliseconds after ingest normalization. Ports and the transport protocol
// are stored wide so validate() can report out-of-range source values.
struct FlowRecord {
    std::int64_t first_switched = 0;  // ms
    std::int64_t last_switched = 0;   // ms
    std::uint64_t in_bytes = 0;
    std::uint64_t out_bytes = 0;
    std::uint64_t in_pkts = 0;
    std::uint64_t out_pkts = 0;
    IpAddress src_ip;
    IpAddress dst_ip;
    std::uint32_t src_port = 0;
    std::uint32_t dst_port = 0;
    std::uint32_t l4_proto = 0;
    std::uint32_t l7_proto = 0;
    FlowLabel label = FlowLabel::unlabeled;

    std::uint64_t total_pkts() const { return in_pkts + out_pkts; }
    std::uint64_t total_bytes() const { return in_bytes + out_bytes; }

    friend bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

struct Validity {
    bool ok = true;
    std::string violation;  // names the first broken invariant when !ok

    explicit operator bool() const { return ok; }
};

// Total function: never throws, reports the first broken invariant.
Validity validate(const FlowRecord& record);

enum class DatasetKind : std::uint8_t { synthetic, real_world };

std::string_view dataset_kind_name(DatasetKind kind);
std::optional<DatasetKind> dataset_kind_from_name(std::string_view name);

// Registry entry for one dataset in a comparison run. benign_only must be
// true before any statistics are computed.
struct DatasetHandle {
    std::string name;
    DatasetKind kind = DatasetKind::synthetic;
    std::string source;
    std::uint64_t flow_count = 0;
    bool benign_only = false;
};

// The nine traffic features. Closed set; every member carries a unit tag.
enum class FeatureId : std::uint8_t {
    flow_duration = 0,
    flow_size_bytes,
    avg_packet_time,
    avg_packet_size,
    src_ips_per_dst_ip,
    src_ips_per_dst_port,
    dst_ips_per_src_port,
    dst_ports_per_src_port,
    l7_protos_per_dst_port,
};

inline constexpr std::size_t kFeatureCount = 9;

inline constexpr std::array<FeatureId, kFeatureCount> kAllFeatures{
    FeatureId::flow_duration,          FeatureId::flow_size_bytes,
    FeatureId::avg_packet_time,        FeatureId::avg_packet_size,
    FeatureId::src_ips_per_dst_ip,     FeatureId::src_ips_per_dst_port,
    FeatureId::dst_ips_per_src_port,   FeatureId::dst_ports_per_src_port,
    FeatureId::l7_protos_per_dst_port};

constexpr const std::array<FeatureId, kFeatureCount>& all_features() { return kAllFeatures; }

std::string_view feature_name(FeatureId id);
std::string_view feature_unit(FeatureId id);
std::optional<FeatureId> feature_from_name(std::string_view name);

// The last five features are per-key distinct counts; the first four are
// per-flow arithmetic.
constexpr bool feature_is_grouped(FeatureId id) {
    return static_cast<std::uint8_t>(id) >= static_cast<std::uint8_t>(FeatureId::src_ips_per_dst_ip);
}

constexpr bool feature_needs_l7(FeatureId id) {
    return id == FeatureId::l7_protos_per_dst_port;
}

// One flow's nine feature values, indexed by FeatureId. Grouped components
// are joined onto the flow via its own key and are always >= 1.
struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::string dataset;

    double operator[](FeatureId id) const { return values[static_cast<std::size_t>(id)]; }
    double& operator[](FeatureId id) { return values[static_cast<std::size_t>(id)]; }
};

}  // namespace flowdist
