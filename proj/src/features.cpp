#include "flowdist/features.hpp"

#include <set>

namespace flowdist {

std::string field_key(const FlowRecord& r, FlowField field) {
    const auto port_key = [](std::uint32_t port) {
        std::string k(3, '\0');
        k[0] = '\x02';
        k[1] = static_cast<char>(port >> 8);
        k[2] = static_cast<char>(port & 0xFF);
        return k;
    };
    switch (field) {
        case FlowField::src_ip: return r.src_ip.key();
        case FlowField::dst_ip: return r.dst_ip.key();
        case FlowField::src_port: return port_key(r.src_port);
        case FlowField::dst_port: return port_key(r.dst_port);
        case FlowField::l7_proto: {
            std::string k(5, '\0');
            k[0] = '\x07';
            k[1] = static_cast<char>(r.l7_proto >> 24);
            k[2] = static_cast<char>(r.l7_proto >> 16);
            k[3] = static_cast<char>(r.l7_proto >> 8);
            k[4] = static_cast<char>(r.l7_proto & 0xFF);
            return k;
        }
    }
    return {};
}

GroupSpec grouped_feature_spec(FeatureId id) {
    switch (id) {
        case FeatureId::src_ips_per_dst_ip: return {FlowField::dst_ip, FlowField::src_ip};
        case FeatureId::src_ips_per_dst_port: return {FlowField::dst_port, FlowField::src_ip};
        case FeatureId::dst_ips_per_src_port: return {FlowField::src_port, FlowField::dst_ip};
        case FeatureId::dst_ports_per_src_port: return {FlowField::src_port, FlowField::dst_port};
        case FeatureId::l7_protos_per_dst_port: return {FlowField::dst_port, FlowField::l7_proto};
        default: throw FlowdistError("grouped_feature_spec: not a grouped feature");
    }
}

std::map<std::string, std::uint64_t> group_distinct_table(std::span<const FlowRecord> records,
                                                          FlowField group_by, FlowField counted) {
    std::map<std::string, std::set<std::string>> groups;
    for (const auto& r : records) groups[field_key(r, group_by)].insert(field_key(r, counted));
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [key, values] : groups) counts.emplace(key, values.size());
    return counts;
}

std::vector<double> group_distinct_count(std::span<const FlowRecord> records, FlowField group_by,
                                         FlowField counted) {
    const auto table = group_distinct_table(records, group_by, counted);
    std::vector<double> values;
    values.reserve(table.size());
    for (const auto& [key, count] : table) values.push_back(static_cast<double>(count));
    return values;
}

namespace {

void check_preconditions(const Dataset& dataset, FeatureId feature) {
    if (!dataset.handle.benign_only)
        throw FlowdistError("dataset '" + dataset.handle.name +
                            "' is not marked benign-only; filter or assert before extracting features");
    if (feature_needs_l7(feature) && !dataset.has_l7_proto)
        throw FlowdistError("feature " + std::string(feature_name(feature)) + " unavailable: dataset '" +
                            dataset.handle.name + "' has no l7_proto column");
}

}  // namespace

FeatureSample extract_feature(const Dataset& dataset, FeatureId feature) {
    check_preconditions(dataset, feature);

    FeatureSample sample;
    sample.feature = feature;
    sample.dataset = dataset.handle.name;

    if (feature_is_grouped(feature)) {
        const auto spec = grouped_feature_spec(feature);
        sample.values = group_distinct_count(dataset.records, spec.group_by, spec.counted);
        return sample;
    }

    sample.values.reserve(dataset.records.size());
    switch (feature) {
        case FeatureId::flow_duration:
            for (const auto& r : dataset.records) sample.values.push_back(flow_duration(r));
            break;
        case FeatureId::flow_size_bytes:
            for (const auto& r : dataset.records) sample.values.push_back(flow_size_bytes(r));
            break;
        case FeatureId::avg_packet_time:
            for (const auto& r : dataset.records) {
                if (const auto v = avg_packet_time(r))
                    sample.values.push_back(*v);
                else
                    ++sample.skipped_degenerate;
            }
            break;
        case FeatureId::avg_packet_size:
            for (const auto& r : dataset.records) {
                if (const auto v = avg_packet_size(r))
                    sample.values.push_back(*v);
                else
                    ++sample.skipped_degenerate;
            }
            break;
        default: break;
    }
    return sample;
}

std::vector<FeatureVector> build_feature_vectors(const Dataset& dataset) {
    check_preconditions(dataset, FeatureId::l7_protos_per_dst_port);

    // one distinct-count table per grouped feature, keyed so each flow can
    // join its own group key
    std::array<std::map<std::string, std::uint64_t>, kFeatureCount> tables;
    for (const auto id : all_features()) {
        if (!feature_is_grouped(id)) continue;
        const auto spec = grouped_feature_spec(id);
        tables[static_cast<std::size_t>(id)] = group_distinct_table(dataset.records, spec.group_by, spec.counted);
    }

    std::vector<FeatureVector> vectors;
    vectors.reserve(dataset.records.size());
    for (const auto& r : dataset.records) {
        const auto pkt_time = avg_packet_time(r);
        const auto pkt_size = avg_packet_size(r);
        if (!pkt_time || !pkt_size) continue;  // degenerate flow: no vector

        FeatureVector v;
        v.dataset = dataset.handle.name;
        v[FeatureId::flow_duration] = flow_duration(r);
        v[FeatureId::flow_size_bytes] = flow_size_bytes(r);
        v[FeatureId::avg_packet_time] = *pkt_time;
        v[FeatureId::avg_packet_size] = *pkt_size;
        for (const auto id : all_features()) {
            if (!feature_is_grouped(id)) continue;
            const auto spec = grouped_feature_spec(id);
            const auto& table = tables[static_cast<std::size_t>(id)];
            v[id] = static_cast<double>(table.at(field_key(r, spec.group_by)));
        }
        vectors.push_back(std::move(v));
    }
    return vectors;
}

}  // namespace flowdist
