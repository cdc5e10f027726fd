#include "flowdist/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace flowdist {

std::string_view timestamp_encoding_name(TimestampEncoding enc) {
    switch (enc) {
        case TimestampEncoding::epoch_ms: return "epoch_ms";
        case TimestampEncoding::epoch_s: return "epoch_s";
        case TimestampEncoding::sysuptime_ms: return "sysuptime_ms";
    }
    return "epoch_ms";
}

std::optional<TimestampEncoding> timestamp_encoding_from_name(std::string_view name) {
    if (name == "epoch_ms") return TimestampEncoding::epoch_ms;
    if (name == "epoch_s") return TimestampEncoding::epoch_s;
    if (name == "sysuptime_ms") return TimestampEncoding::sysuptime_ms;
    return std::nullopt;
}

namespace {

struct MandatoryField {
    const char* key;
    std::string SchemaProfile::*member;
};

constexpr MandatoryField kMandatory[] = {
    {"first_switched", &SchemaProfile::first_switched},
    {"last_switched", &SchemaProfile::last_switched},
    {"in_bytes", &SchemaProfile::in_bytes},
    {"out_bytes", &SchemaProfile::out_bytes},
    {"in_pkts", &SchemaProfile::in_pkts},
    {"out_pkts", &SchemaProfile::out_pkts},
    {"src_ip", &SchemaProfile::src_ip},
    {"dst_ip", &SchemaProfile::dst_ip},
    {"src_port", &SchemaProfile::src_port},
    {"dst_port", &SchemaProfile::dst_port},
    {"l4_proto", &SchemaProfile::l4_proto},
};

}  // namespace

void SchemaProfile::check_complete() const {
    for (const auto& f : kMandatory)
        if ((this->*f.member).empty())
            throw FlowdistError("profile '" + name + "': missing mapping for mandatory field " + f.key);
}

std::optional<SchemaProfile> SchemaProfile::builtin(std::string_view name) {
    SchemaProfile p;
    p.name = std::string(name);
    if (name == "canonical") {
        p.timestamp_encoding = TimestampEncoding::epoch_ms;
        p.first_switched = "first_switched";
        p.last_switched = "last_switched";
        p.in_bytes = "in_bytes";
        p.out_bytes = "out_bytes";
        p.in_pkts = "in_pkts";
        p.out_pkts = "out_pkts";
        p.src_ip = "src_ip";
        p.dst_ip = "dst_ip";
        p.src_port = "src_port";
        p.dst_port = "dst_port";
        p.l4_proto = "l4_proto";
        p.l7_proto = "l7_proto";
        p.label_rule = LabelRule{"label", {"benign"}};
        return p;
    }
    if (name == "nprobe-v9") {
        // nprobe text export; FIRST_SWITCHED/LAST_SWITCHED are epoch seconds
        p.timestamp_encoding = TimestampEncoding::epoch_s;
        p.first_switched = "FIRST_SWITCHED";
        p.last_switched = "LAST_SWITCHED";
        p.in_bytes = "IN_BYTES";
        p.out_bytes = "OUT_BYTES";
        p.in_pkts = "IN_PKTS";
        p.out_pkts = "OUT_PKTS";
        p.src_ip = "IPV4_SRC_ADDR";
        p.dst_ip = "IPV4_DST_ADDR";
        p.src_port = "L4_SRC_PORT";
        p.dst_port = "L4_DST_PORT";
        p.l4_proto = "PROTOCOL";
        p.l7_proto = "L7_PROTO";
        return p;
    }
    if (name == "nfv2") {
        // NetFlow-converted NIDS datasets (v2 feature set); Label is 0/1
        p.timestamp_encoding = TimestampEncoding::epoch_ms;
        p.first_switched = "FLOW_START_MILLISECONDS";
        p.last_switched = "FLOW_END_MILLISECONDS";
        p.in_bytes = "IN_BYTES";
        p.out_bytes = "OUT_BYTES";
        p.in_pkts = "IN_PKTS";
        p.out_pkts = "OUT_PKTS";
        p.src_ip = "IPV4_SRC_ADDR";
        p.dst_ip = "IPV4_DST_ADDR";
        p.src_port = "L4_SRC_PORT";
        p.dst_port = "L4_DST_PORT";
        p.l4_proto = "PROTOCOL";
        p.l7_proto = "L7_PROTO";
        p.label_rule = LabelRule{"Label", {"0"}};
        return p;
    }
    return std::nullopt;
}

std::vector<std::string> SchemaProfile::builtin_names() {
    return {"canonical", "nprobe-v9", "nfv2"};
}

SchemaProfile SchemaProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FlowdistError("cannot open profile file: " + path);

    SchemaProfile p;
    p.name = path;
    std::string benign_values;
    std::string label_column;

    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw FlowdistError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = std::string(trim(text.substr(0, eq)));
        const std::string value = std::string(trim(text.substr(eq + 1)));

        if (key == "name") {
            p.name = value;
        } else if (key == "timestamp_encoding") {
            const auto enc = timestamp_encoding_from_name(value);
            if (!enc) throw FlowdistError(path + ": unknown timestamp_encoding '" + value + "'");
            p.timestamp_encoding = *enc;
        } else if (key == "label") {
            label_column = value;
        } else if (key == "benign_values") {
            benign_values = value;
        } else {
            bool known = false;
            for (const auto& f : kMandatory) {
                if (key == f.key) {
                    p.*f.member = value;
                    known = true;
                    break;
                }
            }
            if (key == "l7_proto") {
                p.l7_proto = value;
                known = true;
            }
            if (!known) throw FlowdistError(path + ": unknown profile key '" + key + "'");
        }
    }
    if (!label_column.empty()) {
        LabelRule rule;
        rule.column = label_column;
        for (const auto& v : split(benign_values, ','))
            if (auto t = trim(v); !t.empty()) rule.benign_values.insert(std::string(t));
        if (rule.benign_values.empty())
            throw FlowdistError(path + ": label column given but benign_values is empty");
        p.label_rule = rule;
    }
    p.check_complete();
    return p;
}

namespace {

// header-based column lookup, case-insensitive
std::optional<std::size_t> find_column(const std::vector<std::string>& header, const std::string& name) {
    const std::string want = to_lower(trim(name));
    for (std::size_t i = 0; i < header.size(); ++i)
        if (to_lower(trim(header[i])) == want) return i;
    return std::nullopt;
}

bool parse_u64(std::string_view text, std::uint64_t& out) {
    const auto t = trim(text);
    if (t.empty()) return false;
    std::uint64_t value = 0;
    for (char c : t) {
        if (c < '0' || c > '9') {
            // tolerate float-formatted counters like "12.0"
            char* end = nullptr;
            const std::string tmp(t);
            const double d = std::strtod(tmp.c_str(), &end);
            if (end != tmp.c_str() + tmp.size() || !std::isfinite(d) || d < 0 ||
                d > 9.0e18 || d != std::floor(d))
                return false;
            out = static_cast<std::uint64_t>(d);
            return true;
        }
        if (value > (std::numeric_limits<std::uint64_t>::max() - 9) / 10) return false;
        value = value * 10 + static_cast<std::uint64_t>(c - '0');
    }
    out = value;
    return true;
}

bool parse_u32(std::string_view text, std::uint32_t& out) {
    std::uint64_t v = 0;
    if (!parse_u64(text, v) || v > std::numeric_limits<std::uint32_t>::max()) return false;
    out = static_cast<std::uint32_t>(v);
    return true;
}

bool parse_timestamp(std::string_view text, TimestampEncoding enc, std::int64_t& out) {
    const std::string t(trim(text));
    if (t.empty()) return false;
    char* end = nullptr;
    const double value = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(value)) return false;
    const double ms = enc == TimestampEncoding::epoch_s ? value * 1000.0 : value;
    if (std::abs(ms) > 4.0e18) return false;
    out = std::llround(ms);
    return true;
}

struct ColumnIndex {
    std::size_t first_switched, last_switched, in_bytes, out_bytes, in_pkts, out_pkts;
    std::size_t src_ip, dst_ip, src_port, dst_port, l4_proto;
    std::optional<std::size_t> l7_proto;
    std::optional<std::size_t> label;
};

void split_into(std::string_view s, char delim, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

ParsedFlows parse_flows(std::istream& source, const SchemaProfile& profile) {
    profile.check_complete();

    std::string line;
    if (!std::getline(source, line)) throw FlowdistError("empty input: no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // strip a UTF-8 BOM if present
    if (line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' && line[2] == '\xBF') line.erase(0, 3);

    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const std::vector<std::string> header = split(line, delim);

    ColumnIndex cols{};
    const auto require = [&](const std::string& name) {
        const auto idx = find_column(header, name);
        if (!idx) throw FlowdistError("missing mandatory column '" + name + "' (profile " + profile.name + ")");
        return *idx;
    };
    cols.first_switched = require(profile.first_switched);
    cols.last_switched = require(profile.last_switched);
    cols.in_bytes = require(profile.in_bytes);
    cols.out_bytes = require(profile.out_bytes);
    cols.in_pkts = require(profile.in_pkts);
    cols.out_pkts = require(profile.out_pkts);
    cols.src_ip = require(profile.src_ip);
    cols.dst_ip = require(profile.dst_ip);
    cols.src_port = require(profile.src_port);
    cols.dst_port = require(profile.dst_port);
    cols.l4_proto = require(profile.l4_proto);
    if (profile.has_l7()) {
        cols.l7_proto = find_column(header, profile.l7_proto);
        if (!cols.l7_proto)
            throw FlowdistError("missing column '" + profile.l7_proto + "' named by profile " + profile.name);
    }
    if (profile.label_rule) {
        cols.label = find_column(header, profile.label_rule->column);
        if (!cols.label)
            throw FlowdistError("missing label column '" + profile.label_rule->column + "' (profile " +
                                profile.name + ")");
    }

    ParsedFlows result;
    auto& report = result.report;
    const auto reject = [&](std::uint64_t line_no, std::string reason) {
        ++report.rejected;
        if (report.reject_details.size() < ParseReport::kMaxRejectDetails)
            report.reject_details.push_back({line_no, std::move(reason)});
    };

    std::vector<std::string> fields;
    std::uint64_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        split_into(line, delim, fields);
        if (fields.size() != header.size()) {
            reject(line_no, "column count mismatch");
            continue;
        }

        FlowRecord rec;
        if (!parse_timestamp(fields[cols.first_switched], profile.timestamp_encoding, rec.first_switched)) {
            reject(line_no, "unparseable timestamp");
            continue;
        }
        if (!parse_timestamp(fields[cols.last_switched], profile.timestamp_encoding, rec.last_switched)) {
            reject(line_no, "unparseable timestamp");
            continue;
        }
        if (!parse_u64(fields[cols.in_bytes], rec.in_bytes) || !parse_u64(fields[cols.out_bytes], rec.out_bytes) ||
            !parse_u64(fields[cols.in_pkts], rec.in_pkts) || !parse_u64(fields[cols.out_pkts], rec.out_pkts)) {
            reject(line_no, "unparseable counter");
            continue;
        }
        const auto src = IpAddress::parse(fields[cols.src_ip]);
        const auto dst = IpAddress::parse(fields[cols.dst_ip]);
        if (!src || !dst) {
            reject(line_no, "unparseable address");
            continue;
        }
        rec.src_ip = *src;
        rec.dst_ip = *dst;
        if (!parse_u32(fields[cols.src_port], rec.src_port) || !parse_u32(fields[cols.dst_port], rec.dst_port)) {
            reject(line_no, "unparseable port");
            continue;
        }
        if (!parse_u32(fields[cols.l4_proto], rec.l4_proto)) {
            reject(line_no, "unparseable protocol");
            continue;
        }
        if (cols.l7_proto) {
            // some exports format L7_PROTO as "7.126" (master.sub); keep the master id
            std::string_view text = trim(fields[*cols.l7_proto]);
            const auto dot = text.find('.');
            if (dot != std::string_view::npos) text = text.substr(0, dot);
            if (!parse_u32(text, rec.l7_proto)) {
                reject(line_no, "unparseable l7 protocol");
                continue;
            }
        }
        if (cols.label) {
            const std::string value = std::string(trim(fields[*cols.label]));
            if (value.empty() || to_lower(value) == "unlabeled") {
                rec.label = FlowLabel::unlabeled;
            } else {
                rec.label = profile.label_rule->benign_values.count(value) ? FlowLabel::benign
                                                                           : FlowLabel::attack;
            }
        }

        if (const auto verdict = validate(rec); !verdict) {
            reject(line_no, verdict.violation);
            continue;
        }
        ++report.accepted;
        if (rec.total_pkts() == 0) ++report.degenerate;
        result.records.push_back(std::move(rec));
    }
    return result;
}

ParsedFlows parse_flows_file(const std::string& path, const SchemaProfile& profile) {
    std::ifstream in(path);
    if (!in) throw FlowdistError("cannot open input file: " + path);
    return parse_flows(in, profile);
}

void write_normalized(std::ostream& out, std::span<const FlowRecord> records) {
    out << "first_switched,last_switched,in_bytes,out_bytes,in_pkts,out_pkts,"
           "src_ip,dst_ip,src_port,dst_port,l4_proto,l7_proto,label\n";
    for (const auto& r : records) {
        out << r.first_switched << ',' << r.last_switched << ',' << r.in_bytes << ',' << r.out_bytes << ','
            << r.in_pkts << ',' << r.out_pkts << ',' << r.src_ip.to_string() << ',' << r.dst_ip.to_string() << ','
            << r.src_port << ',' << r.dst_port << ',' << r.l4_proto << ',' << r.l7_proto << ','
            << label_name(r.label) << '\n';
    }
}

std::vector<FlowRecord> filter_benign(std::vector<FlowRecord> records, const SchemaProfile& profile,
                                      bool caller_asserts_benign, DatasetHandle& handle) {
    if (profile.label_rule) {
        std::erase_if(records, [](const FlowRecord& r) { return r.label != FlowLabel::benign; });
    } else if (!caller_asserts_benign) {
        throw FlowdistError("unlabeled dataset '" + handle.name +
                            "': profile has no label rule and benign-only was not asserted");
    }
    handle.benign_only = true;
    handle.flow_count = records.size();
    return records;
}

std::map<std::string, std::vector<FlowRecord>> split_by_day(std::span<const FlowRecord> records) {
    std::map<std::string, std::vector<FlowRecord>> days;
    for (const auto& r : records) days[utc_date_of_ms(r.first_switched)].push_back(r);
    return days;
}

}  // namespace flowdist
