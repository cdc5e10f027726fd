// Synthetic flow-record generators for tests: two distinct traffic-producing
// processes (a heavy-tailed "real-like" one and a narrow "synthetic-like"
// one) plus small-alphabet random records for exact group-by checks.
#pragma once

#include <cstdint>
#include <vector>

#include "flowdist/flow_model.hpp"

namespace flowgen {

struct FlowProcess {
    double duration_log_mean = 0;  // lognormal ms
    double duration_log_sd = 1;
    double pkt_count_log_mean = 0;  // lognormal packets per flow
    double pkt_count_log_sd = 1;
    double pkt_size_log_mean = 0;  // lognormal bytes per packet
    double pkt_size_log_sd = 0.5;
    std::uint32_t src_ip_pool = 100;
    std::uint32_t dst_ip_pool = 50;
    double ip_zipf_s = 1.1;
    std::vector<std::uint16_t> dst_ports;
    double port_zipf_s = 1.2;
    std::uint32_t src_port_lo = 1024;
    std::uint32_t src_port_hi = 65535;
    std::vector<std::uint32_t> l7_protos;
    std::int64_t start_ms = 1'550'000'000'000;  // capture window
    std::int64_t span_ms = 3 * 86'400'000;
};

// diverse heavy-tailed process standing in for production traffic
FlowProcess real_like_process();

// narrow process standing in for testbed traffic
FlowProcess synthetic_like_process();

std::vector<flowdist::FlowRecord> generate_flows(const FlowProcess& process, std::size_t n,
                                                 std::uint64_t seed);

// uniformly random records over tiny key alphabets (for exact oracles)
std::vector<flowdist::FlowRecord> small_alphabet_flows(std::size_t n, std::uint64_t seed);

}  // namespace flowgen
