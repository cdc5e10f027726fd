#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "flowdist/report.hpp"
#include "flowdist/svg.hpp"
#include "flowgen.hpp"
#include "json.hpp"

using namespace flowdist;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_dataset_csv(const fs::path& file, const flowgen::FlowProcess& process, std::size_t n,
                       std::uint64_t seed) {
    const auto records = flowgen::generate_flows(process, n, seed);
    std::ofstream out(file, std::ios::binary);
    write_normalized(out, records);
}

std::string write_config(const TempDir& dir, const std::string& out_name,
                         const std::string& extra_run_keys = "") {
    const auto cfg_path = dir.path / "run.cfg";
    std::ofstream out(cfg_path);
    out << "[run]\n"
        << "seed = 7\n"
        << "sample_size = 400\n"
        << "embed_sample = 80\n"
        // pooled clusters sit far apart; k must be large enough to bridge them
        << "spectral_k = 100\n"
        << "out = " << (dir.path / out_name).string() << "\n"
        << extra_run_keys
        << "\n[dataset]\n"
        << "name = alpha\npath = " << (dir.path / "alpha.csv").string() << "\n"
        << "profile = canonical\nkind = synthetic\nbenign = labeled\n"
        << "\n[dataset]\n"
        << "name = beta\npath = " << (dir.path / "beta.csv").string() << "\n"
        << "profile = canonical\nkind = real_world\nbenign = labeled\n"
        << "\n[dataset]\n"
        << "name = gamma\npath = " << (dir.path / "gamma.csv").string() << "\n"
        << "profile = canonical\nkind = real_world\nbenign = labeled\n";
    return cfg_path.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config files parse with sections and overrides") {
    TempDir dir("flowdist_cfg_test");
    const auto path = write_config(dir, "out", "normalize = minmax\nfeatures = flow_duration,avg_packet_size\n");
    const auto cfg = load_config(path);
    CHECK(cfg.seed == 7);
    CHECK(cfg.sample_size == 400);
    CHECK(cfg.features.size() == 2);
    REQUIRE(cfg.datasets.size() == 3);
    CHECK(cfg.datasets[0].name == "alpha");
    CHECK(cfg.datasets[1].kind == DatasetKind::real_world);
    cfg.check();

    RunConfig bad = cfg;
    bad.datasets[1].name = "alpha";
    CHECK_THROWS_WITH_AS(bad.check(), doctest::Contains("duplicate"), FlowdistError);

    RunConfig bad_ref = cfg;
    bad_ref.ref1 = "nope";
    bad_ref.ref2 = "alpha";
    CHECK_THROWS_AS(bad_ref.check(), FlowdistError);
}

TEST_CASE("pipeline produces the full bundle on generated data") {
    TempDir dir("flowdist_pipe_test");
    write_dataset_csv(dir.path / "alpha.csv", flowgen::synthetic_like_process(), 900, 1);
    write_dataset_csv(dir.path / "beta.csv", flowgen::real_like_process(), 900, 2);
    write_dataset_csv(dir.path / "gamma.csv", flowgen::real_like_process(), 900, 3);
    const auto cfg = load_config(write_config(dir, "out"));

    const auto bundle = run_pipeline(cfg);
    CHECK(bundle.active_features.size() == 9);
    CHECK(bundle.per_feature.size() == 9);
    REQUIRE(bundle.averaged.has_value());
    CHECK(bundle.averaged->labels == std::vector<std::string>{"alpha", "beta", "gamma"});
    CHECK(bundle.kruskal.size() == 9);
    REQUIRE(bundle.scatter.has_value());  // two real_world datasets become refs
    CHECK(bundle.scatter->ref1 == "beta");
    CHECK(bundle.scatter->ref2 == "gamma");
    CHECK(bundle.embeddings.size() == 4);
    for (const auto& d : bundle.datasets) {
        CHECK(d.sampled == 400);
        CHECK(d.stats.count(FeatureId::flow_duration) == 1);
        CHECK_FALSE(d.stats.at(FeatureId::flow_duration).per_day.empty());
    }

    // 3x3 shape, symmetric, zero diagonal everywhere
    for (const auto& m : bundle.per_feature) {
        REQUIRE(m.entries.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(m.entries[i][i] == 0.0);
            for (std::size_t j = 0; j < 3; ++j) CHECK(m.entries[i][j] == m.entries[j][i]);
        }
    }

    write_bundle(bundle);
    const fs::path out = dir.path / "out";
    CHECK(fs::exists(out / "provenance.json"));
    CHECK(fs::exists(out / "matrices" / "averaged.json"));
    CHECK(fs::exists(out / "matrices" / "flow_duration.svg"));
    CHECK(fs::exists(out / "matrices" / "kruskal_wallis.json"));
    CHECK(fs::exists(out / "matrices" / "scatter.json"));
    CHECK(fs::exists(out / "ecdf" / "flow_size_bytes.json"));
    CHECK(fs::exists(out / "embeddings" / "pca.json"));
    CHECK(fs::exists(out / "embeddings" / "spectral.svg"));
    CHECK(fs::exists(out / "summaries" / "alpha__flow_duration.json"));
    CHECK_FALSE(fs::exists(fs::path(out.string() + ".partial")));

    const auto prov = json::parse(slurp(out / "provenance.json"));
    CHECK(prov.at("seed") == 7);
    CHECK(prov.at("datasets").size() == 3);
    CHECK(prov.at("datasets")[0].at("parse").at("accepted") == 900);
}

TEST_CASE("two tiny datasets with default settings yield nine 2x2 matrices") {
    TempDir dir("flowdist_two_ds_test");
    write_dataset_csv(dir.path / "a.csv", flowgen::real_like_process(), 300, 21);
    write_dataset_csv(dir.path / "b.csv", flowgen::real_like_process(), 300, 22);

    RunConfig cfg;  // all defaults: 50k sample, seed 42, minmax, all features
    cfg.out_dir = (dir.path / "out").string();
    for (const char* name : {"a", "b"}) {
        DatasetSpec spec;
        spec.name = name;
        spec.path = (dir.path / (std::string(name) + ".csv")).string();
        spec.profile = "canonical";
        spec.kind = DatasetKind::real_world;
        cfg.datasets.push_back(spec);
    }

    const auto bundle = run_pipeline(cfg);
    CHECK(bundle.per_feature.size() == 9);
    for (const auto& m : bundle.per_feature) {
        CHECK(m.labels == std::vector<std::string>{"a", "b"});
        CHECK(m.entries.size() == 2);
        CHECK(m.entries[0].size() == 2);
    }
    REQUIRE(bundle.averaged.has_value());
    CHECK(bundle.averaged->feature == "averaged");
    CHECK(bundle.averaged->entries.size() == 2);
}

TEST_CASE("pipeline errors carry the failing stage and dataset") {
    TempDir dir("flowdist_err_test");
    write_dataset_csv(dir.path / "alpha.csv", flowgen::synthetic_like_process(), 100, 1);
    write_dataset_csv(dir.path / "beta.csv", flowgen::real_like_process(), 100, 2);
    // gamma.csv missing entirely
    const auto cfg = load_config(write_config(dir, "out"));

    try {
        run_pipeline(cfg);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage == "ingest");
        CHECK(e.dataset == "gamma");
    }
    CHECK_FALSE(fs::exists(dir.path / "out"));
}

TEST_CASE("run_pipeline twice yields byte-identical artifacts") {
    TempDir dir("flowdist_det_test");
    write_dataset_csv(dir.path / "alpha.csv", flowgen::synthetic_like_process(), 700, 1);
    write_dataset_csv(dir.path / "beta.csv", flowgen::real_like_process(), 700, 2);
    write_dataset_csv(dir.path / "gamma.csv", flowgen::real_like_process(), 700, 3);

    auto cfg = load_config(write_config(dir, "out1"));
    write_bundle(run_pipeline(cfg));
    cfg.out_dir = (dir.path / "out2").string();
    write_bundle(run_pipeline(cfg));

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir.path / "out1")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir.path / "out1");
        const auto twin = dir.path / "out2" / rel;
        REQUIRE(fs::exists(twin));
        CHECK(slurp(entry.path()) == slurp(twin));
        ++compared;
    }
    CHECK(compared > 10);
}

TEST_CASE("ecdf step points trace the worked example") {
    const auto dist = ecdf(std::vector<double>{1, 2, 2, 4});
    const auto steps = ecdf_step_points(dist);
    REQUIRE(steps.size() == 3);
    CHECK(steps[0] == std::pair<double, double>{1, 0.25});
    CHECK(steps[1] == std::pair<double, double>{2, 0.75});
    CHECK(steps[2] == std::pair<double, double>{4, 1.0});
}

TEST_CASE("heatmap annotates every cell with its 2-decimal value") {
    DistanceMatrix m;
    m.labels = {"a", "b"};
    m.feature = "flow_duration";
    m.entries = {{0, 0}, {0, 0}};
    const auto svg = render_heatmap(m);

    std::size_t cells = 0, pos = 0;
    while ((pos = svg.find("class=\"cell\"", pos)) != std::string::npos) {
        ++cells;
        const auto start = svg.find('>', pos) + 1;
        const auto end = svg.find('<', start);
        CHECK(svg.substr(start, end - start) == "0.00");
        pos = end;
    }
    CHECK(cells == 4);
}

TEST_CASE("svg numbers equal the json artifact values at 2 decimals") {
    DistanceMatrix m;
    m.labels = {"x", "y", "z"};
    m.feature = "avg_packet_size";
    m.entries = {{0, 0.512345, 0.25}, {0.512345, 0, 0.125}, {0.25, 0.125, 0}};
    const auto svg = render_heatmap(m);

    for (const auto& row : m.entries) {
        for (const double v : row) {
            char expected[32];
            std::snprintf(expected, sizeof(expected), ">%.2f<", v);
            CHECK(svg.find(expected) != std::string::npos);
        }
    }

    ScatterCoordinates sc;
    sc.ref1 = "y";
    sc.ref2 = "z";
    sc.labels = m.labels;
    sc.coords = {{0.51, 0.25}, {0.0, 0.125}, {0.125, 0.0}};
    const auto scatter_svg = render_scatter(sc);
    for (const auto& c : sc.coords) {
        char expected[64];
        std::snprintf(expected, sizeof(expected), "(%.2f, %.2f)", c[0], c[1]);
        CHECK(scatter_svg.find(expected) != std::string::npos);
    }
}

TEST_CASE("scatter svg places reference points on the axes") {
    DistanceMatrix avg;
    avg.labels = {"s", "r1", "r2"};
    avg.feature = "averaged";
    avg.entries = {{0, 0.4, 0.5}, {0.4, 0, 0.1}, {0.5, 0.1, 0}};
    const auto sc = reference_scatter(avg, "r1", "r2");
    CHECK(sc.coords[1][0] == 0.0);
    CHECK(sc.coords[2][1] == 0.0);
    const auto svg = render_scatter(sc);
    CHECK(svg.find("(0.00, 0.10)") != std::string::npos);
    CHECK(svg.find("(0.10, 0.00)") != std::string::npos);
}

TEST_CASE("renderers reject empty elements") {
    CHECK_THROWS_AS(render_heatmap(DistanceMatrix{}), FlowdistError);
    CHECK_THROWS_AS(render_ecdf("t", "ms", {}, LogAxis::automatic), FlowdistError);
    CHECK_THROWS_AS(render_boxplots("t", "ms", {}, LogAxis::automatic), FlowdistError);
}

TEST_CASE("feature sample json carries the schema fields") {
    FeatureSample s;
    s.feature = FeatureId::avg_packet_time;
    s.dataset = "alpha";
    s.values = {1.5, 2.5};
    s.skipped_degenerate = 3;
    const auto j = json::parse(feature_sample_json(s));
    CHECK(j.at("feature") == "avg_packet_time");
    CHECK(j.at("dataset") == "alpha");
    CHECK(j.at("unit") == "ms/packet");
    CHECK(j.at("values") == json::array({1.5, 2.5}));
    CHECK(j.at("skipped_degenerate") == 3);
}
