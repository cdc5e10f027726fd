#include "flowdist/report.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "flowdist/svg.hpp"
#include "json.hpp"

namespace flowdist {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view normalize_mode_name(NormalizeMode mode) {
    return mode == NormalizeMode::minmax ? "minmax" : "none";
}

std::optional<NormalizeMode> normalize_mode_from_name(std::string_view name) {
    if (name == "minmax") return NormalizeMode::minmax;
    if (name == "none") return NormalizeMode::none;
    return std::nullopt;
}

void RunConfig::check() const {
    if (datasets.size() < 2) throw FlowdistError("config: comparisons need at least 2 datasets");
    std::set<std::string> names;
    for (const auto& d : datasets) {
        if (d.name.empty()) throw FlowdistError("config: dataset with empty name");
        if (!names.insert(d.name).second) throw FlowdistError("config: duplicate dataset name '" + d.name + "'");
        if (d.path.empty()) throw FlowdistError("config: dataset '" + d.name + "' has no path");
        if (d.profile.empty()) throw FlowdistError("config: dataset '" + d.name + "' has no profile");
    }
    for (const auto& r : {ref1, ref2})
        if (!r.empty() && !names.count(r))
            throw FlowdistError("config: reference '" + r + "' is not a configured dataset");
    if (ref1.empty() != ref2.empty())
        throw FlowdistError("config: both scatter references must be set together");
    if (!ref1.empty() && ref1 == ref2) throw FlowdistError("config: scatter references must differ");
    if (features.empty()) throw FlowdistError("config: no features selected");
    if (sample_size == 0) throw FlowdistError("config: sample_size must be >= 1");
    if (embed_sample == 0) throw FlowdistError("config: embed_sample must be >= 1");
    if (spectral_k < 1) throw FlowdistError("config: spectral_k must be >= 1");
}

std::string RunConfig::canonical_string() const {
    std::ostringstream out;
    out << "seed=" << seed << "\nsample_size=" << sample_size
        << "\nnormalize=" << normalize_mode_name(normalize) << "\nembed_sample=" << embed_sample
        << "\nspectral_k=" << spectral_k << "\npca_distance=" << (pca_distance ? 1 : 0)
        << "\nref1=" << ref1 << "\nref2=" << ref2 << "\nfeatures=";
    for (const auto f : features) out << feature_name(f) << ",";
    out << "\nembed_methods=";
    for (const auto m : embed_methods) out << embed_method_name(m) << ",";
    for (const auto& d : datasets)
        out << "\ndataset " << d.name << " path=" << d.path << " profile=" << d.profile
            << " kind=" << dataset_kind_name(d.kind) << " benign=" << (d.assert_benign ? "asserted" : "labeled");
    return out.str();
}

namespace {

std::vector<FeatureId> parse_feature_list(const std::string& value, const std::string& where) {
    if (value == "all") return {all_features().begin(), all_features().end()};
    std::vector<FeatureId> out;
    for (const auto& part : split(value, ',')) {
        const auto name = trim(part);
        if (name.empty()) continue;
        const auto id = feature_from_name(name);
        if (!id) throw FlowdistError(where + ": unknown feature '" + std::string(name) + "'");
        out.push_back(*id);
    }
    return out;
}

std::vector<EmbedMethod> parse_method_list(const std::string& value, const std::string& where) {
    std::vector<EmbedMethod> out;
    if (value == "none") return out;
    for (const auto& part : split(value, ',')) {
        const auto name = trim(part);
        if (name.empty()) continue;
        const auto m = embed_method_from_name(name);
        if (!m) throw FlowdistError(where + ": unknown embedding method '" + std::string(name) + "'");
        out.push_back(*m);
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& where) {
    const auto v = to_lower(value);
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw FlowdistError(where + ": expected on/off, got '" + value + "'");
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FlowdistError("cannot open config file: " + path);

    RunConfig cfg;
    std::string section = "run";
    DatasetSpec current;
    bool in_dataset = false;

    const auto flush_dataset = [&] {
        if (in_dataset) {
            cfg.datasets.push_back(current);
            current = DatasetSpec{};
            in_dataset = false;
        }
    };

    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto where = path + ":" + std::to_string(line_no);
        auto text = trim(line);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = trim(text.substr(0, hash));
        if (text.empty()) continue;

        if (text.front() == '[') {
            if (text.back() != ']') throw FlowdistError(where + ": malformed section header");
            const auto name = std::string(trim(text.substr(1, text.size() - 2)));
            flush_dataset();
            if (name == "run") {
                section = "run";
            } else if (name == "dataset") {
                section = "dataset";
                in_dataset = true;
            } else {
                throw FlowdistError(where + ": unknown section [" + name + "]");
            }
            continue;
        }

        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw FlowdistError(where + ": expected key = value");
        const std::string key = std::string(trim(text.substr(0, eq)));
        const std::string value = std::string(trim(text.substr(eq + 1)));

        if (section == "dataset") {
            if (key == "name") current.name = value;
            else if (key == "path") current.path = value;
            else if (key == "profile") current.profile = value;
            else if (key == "kind") {
                const auto kind = dataset_kind_from_name(value);
                if (!kind) throw FlowdistError(where + ": unknown dataset kind '" + value + "'");
                current.kind = *kind;
            } else if (key == "benign") {
                if (value == "asserted") current.assert_benign = true;
                else if (value == "labeled") current.assert_benign = false;
                else throw FlowdistError(where + ": benign must be 'labeled' or 'asserted'");
            } else {
                throw FlowdistError(where + ": unknown dataset key '" + key + "'");
            }
            continue;
        }

        if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "sample_size") cfg.sample_size = std::stoull(value);
        else if (key == "normalize") {
            const auto mode = normalize_mode_from_name(value);
            if (!mode) throw FlowdistError(where + ": normalize must be minmax or none");
            cfg.normalize = *mode;
        } else if (key == "features") cfg.features = parse_feature_list(value, where);
        else if (key == "embed_methods") cfg.embed_methods = parse_method_list(value, where);
        else if (key == "embed_sample") cfg.embed_sample = std::stoull(value);
        else if (key == "spectral_k") cfg.spectral_k = std::stoi(value);
        else if (key == "pca_distance") cfg.pca_distance = parse_bool(value, where);
        else if (key == "ref1") cfg.ref1 = value;
        else if (key == "ref2") cfg.ref2 = value;
        else if (key == "out") cfg.out_dir = value;
        else if (key == "formats") {
            cfg.write_json = value.find("json") != std::string::npos;
            cfg.write_csv = value.find("csv") != std::string::npos;
            cfg.write_svg = value.find("svg") != std::string::npos;
        } else throw FlowdistError(where + ": unknown run key '" + key + "'");
    }
    flush_dataset();
    return cfg;
}

namespace {

SchemaProfile resolve_profile(const std::string& name_or_path) {
    if (const auto builtin = SchemaProfile::builtin(name_or_path)) return *builtin;
    return SchemaProfile::load(name_or_path);
}

DatasetResult process_dataset(const DatasetSpec& spec, const RunConfig& cfg) {
    DatasetResult result;
    result.spec = spec;
    result.handle.name = spec.name;
    result.handle.kind = spec.kind;
    result.handle.source = spec.path;

    SchemaProfile profile;
    std::vector<FlowRecord> records;
    try {
        profile = resolve_profile(spec.profile);
        auto parsed = parse_flows_file(spec.path, profile);
        result.parse_report = parsed.report;
        result.has_l7 = profile.has_l7();
        records = std::move(parsed.records);
    } catch (const FlowdistError& e) {
        throw StageError("ingest", spec.name, e.what());
    }

    try {
        records = filter_benign(std::move(records), profile, spec.assert_benign, result.handle);
        result.benign_flows = records.size();
    } catch (const FlowdistError& e) {
        throw StageError("filter", spec.name, e.what());
    }

    try {
        if (records.size() > cfg.sample_size)
            records = sample_reservoir(records, cfg.sample_size, cfg.seed ^ fnv1a64(spec.name));
        result.sampled = records.size();
    } catch (const FlowdistError& e) {
        throw StageError("sample", spec.name, e.what());
    }

    try {
        Dataset dataset{result.handle, std::move(records), result.has_l7};
        for (const auto f : cfg.features) {
            if (feature_needs_l7(f) && !result.has_l7) continue;  // dropped later, with a warning
            result.samples[f] = extract_feature(dataset, f);
        }

        // overall and per-day distribution summaries
        for (const auto& [f, sample] : result.samples) {
            FeatureStats stats;
            stats.n = sample.values.size();
            stats.skipped_degenerate = sample.skipped_degenerate;
            if (!sample.values.empty()) stats.overall = boxplot_summary(sample.values);
            result.stats.emplace(f, std::move(stats));
        }
        for (auto& [day, group] : split_by_day(dataset.records)) {
            Dataset day_ds{result.handle, std::move(group), result.has_l7};
            for (auto& [f, stats] : result.stats) {
                const auto day_sample = extract_feature(day_ds, f);
                if (!day_sample.values.empty())
                    stats.per_day.emplace(day, boxplot_summary(day_sample.values));
            }
        }

        if (result.has_l7) {
            auto vectors = build_feature_vectors(dataset);
            if (vectors.size() > cfg.embed_sample)
                vectors = sample_reservoir(vectors, cfg.embed_sample, cfg.seed ^ fnv1a64(spec.name + "/embed"));
            result.embed_vectors = std::move(vectors);
        }
    } catch (const StageError&) {
        throw;
    } catch (const FlowdistError& e) {
        throw StageError("features", spec.name, e.what());
    }
    return result;
}

}  // namespace

DatasetResult process_single_dataset(const DatasetSpec& spec, const RunConfig& config) {
    return process_dataset(spec, config);
}

ReportBundle run_pipeline(const RunConfig& config) {
    try {
        config.check();
    } catch (const FlowdistError& e) {
        throw StageError("config", "", e.what());
    }

    ReportBundle bundle;
    bundle.config = config;
    bundle.config_hash = fnv1a64(config.canonical_string());

    // datasets are independent through ingest/features; run them concurrently
    // and join in configured order so results are deterministic
    std::vector<std::future<DatasetResult>> futures;
    futures.reserve(config.datasets.size());
    for (const auto& spec : config.datasets)
        futures.push_back(std::async(std::launch::async, process_dataset, std::cref(spec), std::cref(config)));
    for (auto& f : futures) bundle.datasets.push_back(f.get());

    // drop features any dataset cannot provide, with a warning
    for (const auto f : config.features) {
        bool available = true;
        std::string why;
        for (const auto& d : bundle.datasets) {
            const auto it = d.samples.find(f);
            if (it == d.samples.end()) {
                available = false;
                why = "dataset '" + d.spec.name + "' has no l7_proto column";
                break;
            }
            if (it->second.values.empty()) {
                available = false;
                why = "dataset '" + d.spec.name + "' yields an empty sample";
                break;
            }
        }
        if (available) {
            bundle.active_features.push_back(f);
        } else {
            bundle.dropped_features.push_back(std::string(feature_name(f)));
            bundle.warnings.push_back("feature " + std::string(feature_name(f)) + " dropped: " + why);
        }
    }

    try {
        if (bundle.active_features.empty())
            throw FlowdistError("no feature is available across all datasets");

        for (const auto f : bundle.active_features) {
            std::vector<FeatureSample> samples;
            samples.reserve(bundle.datasets.size());
            for (const auto& d : bundle.datasets) samples.push_back(d.samples.at(f));

            std::vector<std::vector<double>> groups;
            for (const auto& s : samples) groups.push_back(s.values);
            try {
                bundle.kruskal.emplace(std::string(feature_name(f)), kruskal_wallis(groups));
            } catch (const FlowdistError& e) {
                bundle.warnings.push_back("kruskal_wallis skipped for " + std::string(feature_name(f)) +
                                          ": " + e.what());
            }

            MinMaxRange range{0, 0, false};
            if (config.normalize == NormalizeMode::minmax) range = normalize_features(samples);
            bundle.normalization.emplace(std::string(feature_name(f)), range);
            bundle.per_feature.push_back(pairwise_distance_matrix(samples, f));
        }
        bundle.averaged = averaged_distance_matrix(bundle.per_feature);

        // scatter references: configured, or the two real_world datasets
        std::string ref1 = config.ref1, ref2 = config.ref2;
        if (ref1.empty()) {
            std::vector<std::string> real;
            for (const auto& d : bundle.datasets)
                if (d.spec.kind == DatasetKind::real_world) real.push_back(d.spec.name);
            if (real.size() == 2) {
                ref1 = real[0];
                ref2 = real[1];
            }
        }
        if (!ref1.empty())
            bundle.scatter = reference_scatter(*bundle.averaged, ref1, ref2);
        else
            bundle.warnings.push_back(
                "scatter skipped: no references configured and not exactly two real_world datasets");
    } catch (const FlowdistError& e) {
        throw StageError("metrics", "", e.what());
    }

    const bool all_l7 = std::all_of(bundle.datasets.begin(), bundle.datasets.end(),
                                    [](const DatasetResult& d) { return d.has_l7; });
    const bool want_vectors = !config.embed_methods.empty() || config.pca_distance;
    if (want_vectors && !all_l7) {
        bundle.warnings.push_back("embeddings skipped: feature vectors need the l7_proto column");
    } else if (want_vectors) {
        try {
            if (!config.embed_methods.empty()) {
                std::vector<FeatureVector> pooled;
                for (const auto& d : bundle.datasets)
                    pooled.insert(pooled.end(), d.embed_vectors.begin(), d.embed_vectors.end());
                const auto standardized = standardize(pooled);
                for (const auto method : config.embed_methods) {
                    switch (method) {
                        case EmbedMethod::pca: bundle.embeddings.push_back(pca_2d(standardized)); break;
                        case EmbedMethod::lda: bundle.embeddings.push_back(lda_2d(standardized)); break;
                        case EmbedMethod::mds: bundle.embeddings.push_back(mds_2d(standardized)); break;
                        case EmbedMethod::spectral:
                            bundle.embeddings.push_back(spectral_2d(standardized, config.spectral_k));
                            break;
                    }
                }
            }

            if (config.pca_distance) {
                std::vector<std::vector<FeatureVector>> per_dataset;
                std::vector<std::string> labels;
                for (const auto& d : bundle.datasets) {
                    per_dataset.push_back(d.embed_vectors);
                    labels.push_back(d.spec.name);
                }
                for (const int component : {1, 2})
                    bundle.pca_component_matrices.push_back(
                        wasserstein_over_pca(per_dataset, labels, component));
                auto avg = averaged_distance_matrix(bundle.pca_component_matrices);
                avg.feature = "pca_averaged";
                bundle.pca_averaged = avg;
                if (bundle.scatter)
                    bundle.pca_scatter = reference_scatter(*bundle.pca_averaged, bundle.scatter->ref1,
                                                           bundle.scatter->ref2);
            }
        } catch (const FlowdistError& e) {
            throw StageError("embed", "", e.what());
        }
    }
    return bundle;
}

// --- artifact serialization ------------------------------------------------

namespace {

json json_of(const BoxplotSummary& s) {
    return json{{"mean", s.mean},         {"median", s.median},
                {"q1", s.q1},             {"q3", s.q3},
                {"iqr", s.iqr},           {"whisker_low", s.whisker_low},
                {"whisker_high", s.whisker_high}, {"std", s.std_dev}};
}

json json_of(const DistanceMatrix& m) {
    return json{{"labels", m.labels}, {"feature", m.feature}, {"entries", m.entries}};
}

json json_of(const ScatterCoordinates& sc) {
    json points = json::object();
    for (std::size_t i = 0; i < sc.labels.size(); ++i)
        points[sc.labels[i]] = {sc.coords[i][0], sc.coords[i][1]};
    return json{{"ref1", sc.ref1}, {"ref2", sc.ref2}, {"points", points}};
}

json json_of(const EmbeddingResult& e) {
    return json{{"method", std::string(embed_method_name(e.method))},
                {"points", e.points},
                {"labels", e.labels},
                {"meta", json{{"eigenvalues", e.eigenvalues}, {"notes", e.notes}}}};
}

std::string sanitize(std::string_view name) {
    std::string out(name);
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FlowdistError("cannot write " + path.string());
    out << content;
    if (!out) throw FlowdistError("write failed: " + path.string());
}

std::string csv_full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string matrix_csv(const DistanceMatrix& m) {
    std::ostringstream out;
    out << "label";
    for (const auto& l : m.labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out << m.labels[i];
        for (const double v : m.entries[i]) out << ',' << csv_full_precision(v);
        out << '\n';
    }
    return out.str();
}

std::string embedding_csv(const EmbeddingResult& e) {
    std::ostringstream out;
    out << "x,y,dataset\n";
    for (std::size_t i = 0; i < e.points.size(); ++i)
        out << csv_full_precision(e.points[i][0]) << ',' << csv_full_precision(e.points[i][1]) << ','
            << e.labels[i] << '\n';
    return out.str();
}

std::string hash_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

std::string feature_sample_json(const FeatureSample& sample) {
    const json j{{"feature", std::string(feature_name(sample.feature))},
                 {"dataset", sample.dataset},
                 {"unit", std::string(feature_unit(sample.feature))},
                 {"values", sample.values},
                 {"skipped_degenerate", sample.skipped_degenerate}};
    return j.dump(2) + "\n";
}

void write_bundle(const ReportBundle& bundle) {
    const auto& cfg = bundle.config;
    const fs::path out_dir = cfg.out_dir;
    const fs::path staging = cfg.out_dir + ".partial";

    std::error_code ec;
    fs::remove_all(staging, ec);
    try {
        for (const char* sub : {"summaries", "ecdf", "matrices", "embeddings"})
            fs::create_directories(staging / sub);

        // dataset order and kind, used by several renderers
        std::vector<std::pair<std::string, DatasetKind>> kinds;
        for (const auto& d : bundle.datasets) kinds.emplace_back(d.spec.name, d.spec.kind);
        // paper layout: synthetic datasets left, real-world right
        std::vector<const DatasetResult*> plot_order;
        for (const auto& d : bundle.datasets)
            if (d.spec.kind == DatasetKind::synthetic) plot_order.push_back(&d);
        for (const auto& d : bundle.datasets)
            if (d.spec.kind == DatasetKind::real_world) plot_order.push_back(&d);

        // provenance
        {
            json prov;
            prov["tool"] = "flowdist";
            prov["version"] = "0.1.0";
            prov["config_hash"] = hash_hex(bundle.config_hash);
            prov["seed"] = cfg.seed;
            prov["sample_size"] = cfg.sample_size;
            prov["normalize"] = std::string(normalize_mode_name(cfg.normalize));
            prov["features"] = [&] {
                std::vector<std::string> names;
                for (const auto f : bundle.active_features) names.emplace_back(feature_name(f));
                return names;
            }();
            prov["dropped_features"] = bundle.dropped_features;
            prov["warnings"] = bundle.warnings;
            prov["std_normalization"] = "population";
            json ds = json::array();
            for (const auto& d : bundle.datasets) {
                ds.push_back(json{{"name", d.spec.name},
                                  {"path", d.spec.path},
                                  {"profile", d.spec.profile},
                                  {"kind", std::string(dataset_kind_name(d.spec.kind))},
                                  {"benign", d.spec.assert_benign ? "asserted" : "labeled"},
                                  {"parse", json{{"accepted", d.parse_report.accepted},
                                                 {"rejected", d.parse_report.rejected},
                                                 {"degenerate", d.parse_report.degenerate}}},
                                  {"benign_flows", d.benign_flows},
                                  {"sampled", d.sampled},
                                  {"has_l7_proto", d.has_l7}});
            }
            prov["datasets"] = ds;
            json embed;
            {
                std::vector<std::string> methods;
                for (const auto m : cfg.embed_methods) methods.emplace_back(embed_method_name(m));
                embed = json{{"methods", methods}, {"sample", cfg.embed_sample}, {"spectral_k", cfg.spectral_k}};
            }
            prov["embed"] = embed;
            if (bundle.scatter)
                prov["refs"] = json{{"ref1", bundle.scatter->ref1}, {"ref2", bundle.scatter->ref2}};
            write_file(staging / "provenance.json", prov.dump(2) + "\n");
        }

        // per-dataset per-feature summaries
        for (const auto& d : bundle.datasets) {
            for (const auto& [f, stats] : d.stats) {
                json j{{"dataset", d.spec.name},
                       {"feature", std::string(feature_name(f))},
                       {"unit", std::string(feature_unit(f))},
                       {"n", stats.n},
                       {"skipped_degenerate", stats.skipped_degenerate},
                       {"std_normalization", "population"},
                       {"overall", json_of(stats.overall)}};
                json days = json::object();
                for (const auto& [day, s] : stats.per_day) days[day] = json_of(s);
                j["days"] = days;
                const auto base = sanitize(d.spec.name) + "__" + sanitize(feature_name(f));
                if (cfg.write_json) write_file(staging / "summaries" / (base + ".json"), j.dump(2) + "\n");

                if (cfg.write_svg && stats.per_day.size() > 1) {
                    std::vector<BoxplotEntry> entries;
                    std::size_t day_idx = 0;
                    for (const auto& [day, s] : stats.per_day)
                        entries.push_back({day, dataset_color(d.spec.kind, day_idx++ % 5), s});
                    write_file(staging / "summaries" / (base + "__days.svg"),
                               render_boxplots(d.spec.name + ": " + std::string(feature_name(f)) + " by day",
                                               std::string(feature_unit(f)), entries, LogAxis::automatic));
                }
            }
        }

        // cross-dataset boxplots and ECDFs per feature
        for (const auto f : bundle.active_features) {
            const auto fname = std::string(feature_name(f));
            if (cfg.write_svg) {
                std::vector<BoxplotEntry> entries;
                std::size_t n_syn = 0, n_real = 0;
                for (const auto* d : plot_order) {
                    const auto color = d->spec.kind == DatasetKind::synthetic
                                           ? dataset_color(d->spec.kind, n_syn++)
                                           : dataset_color(d->spec.kind, n_real++);
                    entries.push_back({d->spec.name, color, d->stats.at(f).overall});
                }
                write_file(staging / "summaries" / (sanitize(fname) + "__boxplot.svg"),
                           render_boxplots(fname, std::string(feature_unit(f)), entries, LogAxis::automatic));
            }

            std::vector<EmpiricalDistribution> dists;
            dists.reserve(bundle.datasets.size());
            for (const auto* d : plot_order) dists.push_back(ecdf(d->samples.at(f).values));

            json j{{"feature", fname}, {"unit", std::string(feature_unit(f))}};
            json per_ds = json::object();
            std::ostringstream csv;
            csv << "dataset,value,weight,cum\n";
            for (std::size_t i = 0; i < plot_order.size(); ++i) {
                const auto& dist = dists[i];
                per_ds[plot_order[i]->spec.name] = json{{"n", dist.sample_size()},
                                                        {"support", dist.support()},
                                                        {"weights", dist.weights()},
                                                        {"cum", dist.cumulative()}};
                for (std::size_t s = 0; s < dist.support().size(); ++s)
                    csv << plot_order[i]->spec.name << ',' << csv_full_precision(dist.support()[s]) << ','
                        << csv_full_precision(dist.weights()[s]) << ','
                        << csv_full_precision(dist.cumulative()[s]) << '\n';
            }
            j["datasets"] = per_ds;
            if (cfg.write_json) write_file(staging / "ecdf" / (sanitize(fname) + ".json"), j.dump(2) + "\n");
            if (cfg.write_csv) write_file(staging / "ecdf" / (sanitize(fname) + ".csv"), csv.str());

            if (cfg.write_svg) {
                std::vector<EcdfSeries> series;
                std::size_t n_syn = 0, n_real = 0;
                for (std::size_t i = 0; i < plot_order.size(); ++i) {
                    const auto kind = plot_order[i]->spec.kind;
                    series.push_back({plot_order[i]->spec.name,
                                      dataset_color(kind, kind == DatasetKind::synthetic ? n_syn++ : n_real++),
                                      &dists[i]});
                }
                write_file(staging / "ecdf" / (sanitize(fname) + ".svg"),
                           render_ecdf("ECDF: " + fname, std::string(feature_unit(f)), series,
                                       LogAxis::automatic));
            }
        }

        // distance matrices, tests, scatter
        const auto write_matrix = [&](const DistanceMatrix& m, const std::string& base) {
            json j = json_of(m);
            if (const auto it = bundle.normalization.find(m.feature); it != bundle.normalization.end())
                j["normalization"] = json{{"mode", std::string(normalize_mode_name(cfg.normalize))},
                                          {"min", it->second.min},
                                          {"max", it->second.max},
                                          {"degenerate", it->second.degenerate}};
            if (cfg.write_json) write_file(staging / "matrices" / (base + ".json"), j.dump(2) + "\n");
            if (cfg.write_csv) write_file(staging / "matrices" / (base + ".csv"), matrix_csv(m));
            if (cfg.write_svg) write_file(staging / "matrices" / (base + ".svg"), render_heatmap(m));
        };

        for (const auto& m : bundle.per_feature) write_matrix(m, sanitize(m.feature));
        if (bundle.averaged) write_matrix(*bundle.averaged, "averaged");
        for (const auto& m : bundle.pca_component_matrices) write_matrix(m, sanitize(m.feature));
        if (bundle.pca_averaged) write_matrix(*bundle.pca_averaged, "pca_averaged");

        if (!bundle.kruskal.empty()) {
            json j = json::object();
            for (const auto& [fname, kw] : bundle.kruskal)
                j[fname] = json{{"h", kw.h_statistic},
                                {"p_value", kw.p_value},
                                {"df", kw.df},
                                {"tie_correction", kw.tie_correction}};
            if (cfg.write_json)
                write_file(staging / "matrices" / "kruskal_wallis.json", j.dump(2) + "\n");
        }

        if (bundle.scatter) {
            if (cfg.write_json)
                write_file(staging / "matrices" / "scatter.json", json_of(*bundle.scatter).dump(2) + "\n");
            if (cfg.write_svg)
                write_file(staging / "matrices" / "scatter.svg", render_scatter(*bundle.scatter));
        }
        if (bundle.pca_scatter) {
            if (cfg.write_json)
                write_file(staging / "matrices" / "pca_scatter.json",
                           json_of(*bundle.pca_scatter).dump(2) + "\n");
            if (cfg.write_svg)
                write_file(staging / "matrices" / "pca_scatter.svg", render_scatter(*bundle.pca_scatter));
        }

        for (const auto& e : bundle.embeddings) {
            const auto base = std::string(embed_method_name(e.method));
            json j = json_of(e);
            j["params"] = json{{"embed_sample", cfg.embed_sample}, {"standardize", "pooled"}};
            if (e.method == EmbedMethod::spectral) j["params"]["k"] = cfg.spectral_k;
            if (cfg.write_json) write_file(staging / "embeddings" / (base + ".json"), j.dump(2) + "\n");
            if (cfg.write_csv) write_file(staging / "embeddings" / (base + ".csv"), embedding_csv(e));
            if (cfg.write_svg)
                write_file(staging / "embeddings" / (base + ".svg"), render_embedding(e, kinds));
        }

        fs::remove_all(out_dir);
        fs::rename(staging, out_dir);
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }
}

}  // namespace flowdist
