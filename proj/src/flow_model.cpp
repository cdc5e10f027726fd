#include "flowdist/flow_model.hpp"

#include <arpa/inet.h>

#include <cstdio>
#include <cstring>

#include "flowdist/util.hpp"

namespace flowdist {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
    const auto trimmed = trim(text);
    if (trimmed.empty() || trimmed.size() > 45) return std::nullopt;
    char buf[46];
    std::memcpy(buf, trimmed.data(), trimmed.size());
    buf[trimmed.size()] = '\0';

    IpAddress addr;
    if (trimmed.find(':') != std::string_view::npos) {
        if (inet_pton(AF_INET6, buf, addr.bytes_.data()) != 1) return std::nullopt;
        addr.v6_ = true;
        return addr;
    }
    if (trimmed.find('.') != std::string_view::npos) {
        if (inet_pton(AF_INET, buf, addr.bytes_.data()) != 1) return std::nullopt;
        return addr;
    }
    // bare decimal v4
    std::uint64_t value = 0;
    for (char c : trimmed) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + static_cast<std::uint64_t>(c - '0');
        if (value > 0xFFFFFFFFull) return std::nullopt;
    }
    return from_v4(static_cast<std::uint32_t>(value));
}

IpAddress IpAddress::from_v4(std::uint32_t host_order) {
    IpAddress addr;
    addr.bytes_[0] = static_cast<std::uint8_t>(host_order >> 24);
    addr.bytes_[1] = static_cast<std::uint8_t>(host_order >> 16);
    addr.bytes_[2] = static_cast<std::uint8_t>(host_order >> 8);
    addr.bytes_[3] = static_cast<std::uint8_t>(host_order);
    return addr;
}

std::string IpAddress::to_string() const {
    char buf[INET6_ADDRSTRLEN];
    const char* out = inet_ntop(v6_ ? AF_INET6 : AF_INET, bytes_.data(), buf, sizeof(buf));
    return out ? std::string(out) : std::string();
}

std::string IpAddress::key() const {
    std::string k;
    k.reserve(v6_ ? 17 : 5);
    k.push_back(v6_ ? '\x06' : '\x04');
    k.append(reinterpret_cast<const char*>(bytes_.data()), v6_ ? 16 : 4);
    return k;
}

std::string_view label_name(FlowLabel label) {
    switch (label) {
        case FlowLabel::benign: return "benign";
        case FlowLabel::attack: return "attack";
        case FlowLabel::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

std::optional<FlowLabel> label_from_name(std::string_view name) {
    if (name == "benign") return FlowLabel::benign;
    if (name == "attack") return FlowLabel::attack;
    if (name == "unlabeled") return FlowLabel::unlabeled;
    return std::nullopt;
}

Validity validate(const FlowRecord& r) {
    if (r.last_switched < r.first_switched) return {false, "last_switched < first_switched"};
    if (r.src_port > 65535) return {false, "src_port out of range"};
    if (r.dst_port > 65535) return {false, "dst_port out of range"};
    if (r.l4_proto > 255) return {false, "l4_proto out of range"};
    if (r.total_pkts() == 0 && r.total_bytes() > 0) return {false, "zero packets but nonzero bytes"};
    return {};
}

std::string_view dataset_kind_name(DatasetKind kind) {
    return kind == DatasetKind::synthetic ? "synthetic" : "real_world";
}

std::optional<DatasetKind> dataset_kind_from_name(std::string_view name) {
    if (name == "synthetic") return DatasetKind::synthetic;
    if (name == "real_world" || name == "real-world") return DatasetKind::real_world;
    return std::nullopt;
}

namespace {

struct FeatureInfo {
    std::string_view name;
    std::string_view unit;
};

constexpr std::array<FeatureInfo, kFeatureCount> kFeatureInfo{{
    {"flow_duration", "ms"},
    {"flow_size_bytes", "bytes"},
    {"avg_packet_time", "ms/packet"},
    {"avg_packet_size", "bytes/packet"},
    {"src_ips_per_dst_ip", "count"},
    {"src_ips_per_dst_port", "count"},
    {"dst_ips_per_src_port", "count"},
    {"dst_ports_per_src_port", "count"},
    {"l7_protos_per_dst_port", "count"},
}};

}  // namespace

std::string_view feature_name(FeatureId id) {
    return kFeatureInfo[static_cast<std::size_t>(id)].name;
}

std::string_view feature_unit(FeatureId id) {
    return kFeatureInfo[static_cast<std::size_t>(id)].unit;
}

std::optional<FeatureId> feature_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (kFeatureInfo[i].name == name) return static_cast<FeatureId>(i);
    return std::nullopt;
}

std::string utc_date_of_ms(std::int64_t epoch_ms) {
    // floor division so pre-1970 timestamps land on the right day
    std::int64_t days = epoch_ms / 86'400'000;
    if (epoch_ms % 86'400'000 < 0) --days;

    // civil-from-days (Howard Hinnant's algorithm)
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const std::uint64_t doe = static_cast<std::uint64_t>(days - era * 146097);
    const std::uint64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const std::uint64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::uint64_t mp = (5 * doy + 2) / 153;
    const std::uint64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::uint64_t m = mp < 10 ? mp + 3 : mp - 9;
    const std::int64_t year = y + (m <= 2);

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02llu-%02llu", static_cast<long long>(year),
                  static_cast<unsigned long long>(m), static_cast<unsigned long long>(d));
    return buf;
}

}  // namespace flowdist
