#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "flowdist/report.hpp"

namespace fs = std::filesystem;
using namespace flowdist;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> sample_size;
    std::optional<std::string> normalize;
    std::optional<std::string> out_dir;
    std::optional<std::string> formats;
    std::optional<std::string> feature;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
    auto* opt = cmd->add_option("--config", flags.config_path, "run config file");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "sampling seed override");
    cmd->add_option("--sample-size", flags.sample_size, "per-dataset flow sample size override");
    cmd->add_option("--normalize", flags.normalize, "minmax or none")
        ->check(CLI::IsMember({"minmax", "none"}));
    cmd->add_option("--out", flags.out_dir, "output directory override");
    cmd->add_option("--format", flags.formats, "comma list of json,csv,svg");
    cmd->add_option("--feature", flags.feature, "restrict to one feature (or comma list)");
}

RunConfig resolve_config(const CommonFlags& flags) {
    RunConfig cfg = load_config(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.sample_size) cfg.sample_size = *flags.sample_size;
    if (flags.normalize) cfg.normalize = *normalize_mode_from_name(*flags.normalize);
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.formats) {
        cfg.write_json = flags.formats->find("json") != std::string::npos;
        cfg.write_csv = flags.formats->find("csv") != std::string::npos;
        cfg.write_svg = flags.formats->find("svg") != std::string::npos;
    }
    if (flags.feature) {
        std::vector<FeatureId> selected;
        for (const auto& part : split(*flags.feature, ',')) {
            const auto name = trim(part);
            if (name.empty()) continue;
            const auto id = feature_from_name(name);
            if (!id) throw FlowdistError("unknown feature '" + std::string(name) + "'");
            selected.push_back(*id);
        }
        if (selected.empty()) throw FlowdistError("--feature selected nothing");
        cfg.features = selected;
    }
    return cfg;
}

void print_parse_report(const std::string& name, const ParseReport& report) {
    std::cout << name << ": accepted " << report.accepted << ", rejected " << report.rejected
              << ", degenerate " << report.degenerate << "\n";
    for (const auto& r : report.reject_details)
        std::cout << "  line " << r.line_no << ": " << r.reason << "\n";
    if (report.rejected > report.reject_details.size())
        std::cout << "  ... " << (report.rejected - report.reject_details.size()) << " more rejects\n";
}

int run_ingest(const std::string& input, const std::string& profile_name, bool assert_benign,
               bool benign_only, const std::string& out_path) {
    SchemaProfile profile;
    if (const auto builtin = SchemaProfile::builtin(profile_name))
        profile = *builtin;
    else
        profile = SchemaProfile::load(profile_name);

    auto parsed = parse_flows_file(input, profile);
    print_parse_report(input, parsed.report);

    auto records = std::move(parsed.records);
    if (benign_only) {
        DatasetHandle handle;
        handle.name = input;
        records = filter_benign(std::move(records), profile, assert_benign, handle);
        std::cout << "benign flows: " << records.size() << "\n";
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw FlowdistError("cannot write " + out_path);
        write_normalized(out, records);
        std::cout << "normalized " << records.size() << " flows -> " << out_path << "\n";
    }
    return 0;
}

void write_feature_samples(const DatasetResult& result, const RunConfig& cfg) {
    const fs::path dir = fs::path(cfg.out_dir) / "features";
    fs::create_directories(dir);
    for (const auto& [f, sample] : result.samples) {
        std::string base = result.spec.name + "__" + std::string(feature_name(f));
        for (char& c : base)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
        {
            std::ofstream out(dir / (base + ".json"), std::ios::binary);
            out << feature_sample_json(sample);
        }
        if (cfg.write_csv) {
            std::ofstream out(dir / (base + ".csv"), std::ios::binary);
            out << "value\n";
            char buf[64];
            for (const double v : sample.values) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << buf << "\n";
            }
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowdist: statistical similarity of flow-based NIDS datasets"};
    app.require_subcommand(1);

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "validate and normalize one flow export");
    std::string ingest_input, ingest_profile = "canonical", ingest_out;
    bool ingest_assert = false, ingest_benign_only = false;
    ingest_cmd->add_option("--input", ingest_input, "delimited flow export with header")->required();
    ingest_cmd->add_option("--profile", ingest_profile, "builtin profile name or profile file");
    ingest_cmd->add_flag("--assert-benign", ingest_assert, "attest the source is benign-only");
    ingest_cmd->add_flag("--benign-only", ingest_benign_only, "filter to benign flows before writing");
    ingest_cmd->add_option("--out", ingest_out, "write normalized records here");

    // features
    auto* features_cmd = app.add_subcommand("features", "emit per-feature value samples");
    CommonFlags features_flags;
    add_common(features_cmd, features_flags);

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "distance matrices, tests and scatter");
    CommonFlags compare_flags;
    bool compare_pca = false;
    add_common(compare_cmd, compare_flags);
    compare_cmd->add_flag("--pca-distance", compare_pca, "also emit W1 over shared PCA components");

    // embed
    auto* embed_cmd = app.add_subcommand("embed", "2-D embeddings of the nine features");
    CommonFlags embed_flags;
    std::optional<std::string> embed_methods;
    std::optional<int> embed_k;
    add_common(embed_cmd, embed_flags);
    embed_cmd->add_option("--methods", embed_methods, "comma list of pca,lda,mds,spectral");
    embed_cmd->add_option("--k", embed_k, "spectral neighbor count");

    // report
    auto* report_cmd = app.add_subcommand("report", "full pipeline with SVG figures");
    CommonFlags report_flags;
    add_common(report_cmd, report_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest_cmd)
            return run_ingest(ingest_input, ingest_profile, ingest_assert, ingest_benign_only, ingest_out);

        if (*features_cmd) {
            RunConfig cfg = resolve_config(features_flags);
            for (const auto& spec : cfg.datasets) {
                const auto result = process_single_dataset(spec, cfg);
                print_parse_report(spec.name, result.parse_report);
                write_feature_samples(result, cfg);
            }
            std::cout << "feature samples -> " << cfg.out_dir << "/features\n";
            return 0;
        }

        if (*compare_cmd) {
            RunConfig cfg = resolve_config(compare_flags);
            cfg.embed_methods.clear();
            if (compare_pca) cfg.pca_distance = true;
            auto bundle = run_pipeline(cfg);
            write_bundle(bundle);
            for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "report bundle -> " << cfg.out_dir << "\n";
            return 0;
        }

        if (*embed_cmd) {
            RunConfig cfg = resolve_config(embed_flags);
            if (embed_methods) {
                cfg.embed_methods.clear();
                for (const auto& part : split(*embed_methods, ',')) {
                    const auto name = trim(part);
                    if (name.empty()) continue;
                    const auto m = embed_method_from_name(name);
                    if (!m) throw FlowdistError("unknown embedding method '" + std::string(name) + "'");
                    cfg.embed_methods.push_back(*m);
                }
            }
            if (embed_k) cfg.spectral_k = *embed_k;
            auto bundle = run_pipeline(cfg);
            write_bundle(bundle);
            for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "report bundle -> " << cfg.out_dir << "\n";
            return 0;
        }

        if (*report_cmd) {
            RunConfig cfg = resolve_config(report_flags);
            auto bundle = run_pipeline(cfg);
            write_bundle(bundle);
            for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << "report bundle -> " << cfg.out_dir << "\n";
            return 0;
        }
    } catch (const StageError& e) {
        std::cerr << "error: stage=" << e.stage;
        if (!e.dataset.empty()) std::cerr << " dataset=" << e.dataset;
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
