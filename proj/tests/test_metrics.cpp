#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "flowdist/metrics.hpp"
#include "flowdist/util.hpp"
#include "oracles.hpp"

using namespace flowdist;

namespace {

std::vector<double> random_sample(std::mt19937_64& gen, std::size_t n, bool with_ties = true) {
    std::vector<double> out(n);
    for (auto& v : out) {
        v = rng::uniform(gen, -5, 5);
        if (with_ties && rng::unit(gen) < 0.4) v = std::round(v * 2) / 2;  // grid values create ties
    }
    return out;
}

FeatureSample sample_of(std::string name, std::vector<double> values) {
    FeatureSample s;
    s.feature = FeatureId::flow_duration;
    s.dataset = std::move(name);
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("wasserstein_1d on point masses and identical samples") {
    CHECK(wasserstein_1d(std::vector<double>{0}, std::vector<double>{3}) == 3.0);
    const std::vector<double> s{1, 2, 2, 7, -1};
    CHECK(wasserstein_1d(s, s) == 0.0);
    CHECK_THROWS_AS(wasserstein_1d(std::vector<double>{}, s), FlowdistError);
}

TEST_CASE("wasserstein_1d matches the equal-size sorted-difference oracle") {
    CHECK(wasserstein_1d(std::vector<double>{0, 1, 3}, std::vector<double>{5, 6, 8}) ==
          doctest::Approx(5.0).epsilon(1e-12));
    std::mt19937_64 gen(101);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 1 + rng::below(gen, 200);
        const auto u = random_sample(gen, n);
        const auto v = random_sample(gen, n);
        CHECK(std::abs(wasserstein_1d(u, v) - oracles::w1_equal_size(u, v)) < 1e-9);
    }
}

TEST_CASE("wasserstein_1d matches brute-force optimal transport on tiny samples") {
    std::mt19937_64 gen(102);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t nu = 1 + rng::below(gen, 6);
        const std::size_t nv = 1 + rng::below(gen, 6);
        const auto u = random_sample(gen, nu);
        const auto v = random_sample(gen, nv);
        CHECK(std::abs(wasserstein_1d(u, v) - oracles::w1_assignment(u, v)) < 1e-9);
    }
}

TEST_CASE("hungarian assignment oracle agrees with full enumeration") {
    std::mt19937_64 gen(103);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 1 + rng::below(gen, 6);
        const auto u = random_sample(gen, n);
        const auto v = random_sample(gen, n);
        CHECK(std::abs(oracles::w1_assignment(u, v) - oracles::w1_enumeration(u, v)) < 1e-12);
    }
}

TEST_CASE("wasserstein_1d is exactly symmetric and zero iff equal multisets") {
    std::mt19937_64 gen(104);
    for (int rep = 0; rep < 200; ++rep) {
        auto u = random_sample(gen, 1 + rng::below(gen, 40));
        auto v = random_sample(gen, 1 + rng::below(gen, 40));
        CHECK(wasserstein_1d(u, v) == wasserstein_1d(v, u));

        auto shuffled = u;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        CHECK(wasserstein_1d(u, shuffled) == 0.0);

        auto perturbed = u;
        perturbed[rng::below(gen, perturbed.size())] += 0.125;
        CHECK(wasserstein_1d(u, perturbed) > 0.0);
    }
}

TEST_CASE("wasserstein_1d translation invariance and scale equivariance") {
    std::mt19937_64 gen(105);
    for (int rep = 0; rep < 100; ++rep) {
        const auto u = random_sample(gen, 1 + rng::below(gen, 60));
        const auto v = random_sample(gen, 1 + rng::below(gen, 60));
        const double base = wasserstein_1d(u, v);

        const double shift = rng::uniform(gen, -20, 20);
        std::vector<double> us(u), vs(v);
        for (auto& x : us) x += shift;
        for (auto& x : vs) x += shift;
        CHECK(std::abs(wasserstein_1d(us, vs) - base) < 1e-9);

        const double scale = rng::uniform(gen, 0.1, 10);
        std::vector<double> ua(u), va(v);
        for (auto& x : ua) x *= scale;
        for (auto& x : va) x *= scale;
        CHECK(std::abs(wasserstein_1d(ua, va) - scale * base) < 1e-9 * std::max(1.0, scale));
    }
}

TEST_CASE("normalize_features rescales over the union") {
    auto a = sample_of("a", {0, 50, 200});
    auto b = sample_of("b", {100});
    std::vector<FeatureSample> samples{a, b};
    const auto range = normalize_features(samples);
    CHECK(range.min == 0);
    CHECK(range.max == 200);
    CHECK_FALSE(range.degenerate);
    CHECK(samples[0].values == std::vector<double>{0, 0.25, 1.0});
    CHECK(samples[1].values == std::vector<double>{0.5});

    std::vector<FeatureSample> constant{sample_of("a", {3, 3}), sample_of("b", {3})};
    const auto degenerate = normalize_features(constant);
    CHECK(degenerate.degenerate);
    CHECK(constant[0].values == std::vector<double>{0, 0});
    CHECK(constant[1].values == std::vector<double>{0});
}

TEST_CASE("normalization divides distances by the union range") {
    std::mt19937_64 gen(106);
    for (int rep = 0; rep < 50; ++rep) {
        auto u = sample_of("u", random_sample(gen, 1 + rng::below(gen, 100)));
        auto v = sample_of("v", random_sample(gen, 1 + rng::below(gen, 100)));
        const double raw = wasserstein_1d(u.values, v.values);

        std::vector<FeatureSample> samples{u, v};
        const auto range = normalize_features(samples);
        if (range.degenerate) continue;
        const double rescaled = wasserstein_1d(samples[0].values, samples[1].values);
        CHECK(std::abs(rescaled - raw / (range.max - range.min)) < 1e-9);
    }
}

TEST_CASE("pairwise matrix is symmetric with zero diagonal") {
    std::mt19937_64 gen(107);
    std::vector<FeatureSample> samples;
    for (int d = 0; d < 4; ++d)
        samples.push_back(sample_of("d" + std::to_string(d), random_sample(gen, 200)));
    const auto m = pairwise_distance_matrix(samples, FeatureId::flow_duration);
    REQUIRE(m.labels.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(m.entries[i][i] == 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(m.entries[i][j] == m.entries[j][i]);
            CHECK(m.entries[i][j] >= 0.0);
        }
    }

    std::vector<FeatureSample> identical{sample_of("a", {1, 2, 3}), sample_of("b", {3, 2, 1})};
    const auto zero = pairwise_distance_matrix(identical, FeatureId::flow_duration);
    CHECK(zero.entries[0][1] == 0.0);

    std::vector<FeatureSample> with_empty{sample_of("a", {1}), sample_of("b", {})};
    CHECK_THROWS_WITH_AS(pairwise_distance_matrix(with_empty, FeatureId::flow_duration),
                         doctest::Contains("'b'"), FlowdistError);
}

TEST_CASE("normalized distance of shifted uniforms equals shift over union range") {
    // uniform(0,1) vs uniform(0.5,1.5): union range 1.5, so the normalized
    // distance is 0.5/1.5 = 1/3
    std::mt19937_64 gen(113);
    std::vector<FeatureSample> samples(2);
    samples[0].dataset = "u";
    samples[1].dataset = "v";
    samples[0].values.resize(50'000);
    samples[1].values.resize(50'000);
    for (auto& x : samples[0].values) x = rng::unit(gen);
    for (auto& x : samples[1].values) x = 0.5 + rng::unit(gen);

    normalize_features(samples);
    const auto m = pairwise_distance_matrix(samples, FeatureId::flow_duration);
    CHECK(m.entries[0][1] == doctest::Approx(0.5 / 1.5).epsilon(0.03));
    CHECK(std::abs(m.entries[0][1] - 0.5 / 1.5) < 0.01);
}

TEST_CASE("wasserstein triangle inequality on random triples") {
    std::mt19937_64 gen(108);
    for (int rep = 0; rep < 2000; ++rep) {
        const auto u = random_sample(gen, 1 + rng::below(gen, 30));
        const auto v = random_sample(gen, 1 + rng::below(gen, 30));
        const auto w = random_sample(gen, 1 + rng::below(gen, 30));
        CHECK(wasserstein_1d(u, w) <= wasserstein_1d(u, v) + wasserstein_1d(v, w) + 1e-9);
    }
}

TEST_CASE("averaged matrix is the entrywise mean") {
    DistanceMatrix m;
    m.labels = {"a", "b"};
    m.feature = "flow_duration";
    m.entries = {{0, 4}, {4, 0}};

    const auto self = averaged_distance_matrix({m});
    CHECK(self.entries == m.entries);
    CHECK(self.feature == "averaged");

    DistanceMatrix zero = m;
    zero.entries = {{0, 0}, {0, 0}};
    const auto half = averaged_distance_matrix({m, zero});
    CHECK(half.entries[0][1] == 2.0);

    DistanceMatrix other = m;
    other.labels = {"x", "y"};
    CHECK_THROWS_WITH_AS(averaged_distance_matrix({m, other}), doctest::Contains("label"),
                         FlowdistError);
}

TEST_CASE("averaging preserves symmetry and the zero diagonal") {
    std::mt19937_64 gen(109);
    std::vector<DistanceMatrix> matrices;
    for (int k = 0; k < 9; ++k) {
        DistanceMatrix m;
        m.labels = {"a", "b", "c"};
        m.feature = "f" + std::to_string(k);
        m.entries.assign(3, std::vector<double>(3, 0));
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                m.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    m.entries[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                        rng::uniform(gen, 0, 1);
        matrices.push_back(std::move(m));
    }
    const auto avg = averaged_distance_matrix(matrices);
    for (int i = 0; i < 3; ++i) {
        CHECK(avg.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] == 0.0);
        for (int j = 0; j < 3; ++j)
            CHECK(avg.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
                  avg.entries[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("reference scatter places references on the axes") {
    DistanceMatrix avg;
    avg.labels = {"syn1", "syn2", "real1", "real2"};
    avg.feature = "averaged";
    avg.entries = {{0, 1, 2, 3}, {1, 0, 4, 5}, {2, 4, 0, 0.5}, {3, 5, 0.5, 0}};

    const auto sc = reference_scatter(avg, "real1", "real2");
    REQUIRE(sc.labels.size() == 4);
    CHECK(sc.coords[2] == std::array<double, 2>{0.0, 0.5});  // ref1 -> (0, d12)
    CHECK(sc.coords[3] == std::array<double, 2>{0.5, 0.0});  // ref2 -> (d12, 0)
    CHECK(sc.coords[0] == std::array<double, 2>{2.0, 3.0});  // read from the row
    CHECK(sc.coords[1] == std::array<double, 2>{4.0, 5.0});

    CHECK_THROWS_WITH_AS(reference_scatter(avg, "nope", "real2"), doctest::Contains("nope"),
                         FlowdistError);
}

TEST_CASE("kruskal_wallis reproduces hand-evaluated statistics") {
    const auto a = kruskal_wallis({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    CHECK(a.h_statistic == doctest::Approx(7.2).epsilon(1e-12));
    CHECK(a.df == 2);
    // chi2 sf with 2 df has the closed form exp(-x/2)
    CHECK(a.p_value == doctest::Approx(std::exp(-3.6)).epsilon(1e-12));

    const auto b = kruskal_wallis({{1, 3}, {2, 4}});
    CHECK(b.h_statistic == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(b.df == 1);
    // chi2 sf with 1 df equals erfc(sqrt(x/2))
    CHECK(b.p_value == doctest::Approx(std::erfc(std::sqrt(0.3))).epsilon(1e-10));

    CHECK_THROWS_WITH_AS(kruskal_wallis({{2, 2}, {2, 2, 2}}), doctest::Contains("degenerate"),
                         FlowdistError);
    CHECK_THROWS_AS(kruskal_wallis({{1, 2}}), FlowdistError);
    CHECK_THROWS_AS(kruskal_wallis({{1}, {}}), FlowdistError);
}

TEST_CASE("kruskal_wallis matches the O(n^2) oracle with ties") {
    std::mt19937_64 gen(110);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<std::vector<double>> groups(2 + rng::below(gen, 3));
        bool degenerate = true;
        for (auto& g : groups) g = random_sample(gen, 1 + rng::below(gen, 30));
        for (const auto& g : groups)
            for (const double v : g) degenerate = degenerate && v == groups[0][0];
        if (degenerate) continue;
        const auto got = kruskal_wallis(groups);
        CHECK(got.h_statistic == doctest::Approx(oracles::kruskal_wallis_h(groups)).epsilon(1e-10));
    }
}

TEST_CASE("kruskal_wallis is exactly invariant under monotone transforms") {
    std::mt19937_64 gen(111);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::vector<double>> groups(3);
        for (auto& g : groups) g = random_sample(gen, 5 + rng::below(gen, 30));
        const auto base = kruskal_wallis(groups);

        auto cubed = groups;
        for (auto& g : cubed)
            for (auto& v : g) v = v * v * v;  // strictly monotone on R
        const auto transformed = kruskal_wallis(cubed);
        CHECK(base.h_statistic == transformed.h_statistic);
        CHECK(base.p_value == transformed.p_value);
    }
}

TEST_CASE("chi_squared_sf agrees with closed forms") {
    CHECK(chi_squared_sf(0, 3) == 1.0);
    for (const double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0}) {
        CHECK(chi_squared_sf(x, 2) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-12));
        CHECK(chi_squared_sf(x, 1) == doctest::Approx(std::erfc(std::sqrt(x / 2))).epsilon(1e-10));
        // df=4: Q = exp(-x/2) * (1 + x/2)
        CHECK(chi_squared_sf(x, 4) == doctest::Approx(std::exp(-x / 2) * (1 + x / 2)).epsilon(1e-12));
    }
}

TEST_CASE("wasserstein_over_pca separates shifted clouds along the leading axis") {
    std::mt19937_64 gen(112);
    const double delta = 3.0, sigma = 1.0;
    const double offset = delta / (2.0 * std::sqrt(2.0));

    std::vector<std::vector<FeatureVector>> datasets(2);
    std::vector<std::string> labels{"a", "b"};
    for (int d = 0; d < 2; ++d) {
        const double center = d == 0 ? -offset : offset;
        for (int i = 0; i < 4000; ++i) {
            FeatureVector v;
            v.dataset = labels[static_cast<std::size_t>(d)];
            for (std::size_t k = 0; k < kFeatureCount; ++k) v.values[k] = sigma * rng::normal(gen);
            v.values[0] += center;  // separation along (e1+e2)/sqrt(2)
            v.values[1] += center;
            datasets[static_cast<std::size_t>(d)].push_back(std::move(v));
        }
    }

    const auto m = wasserstein_over_pca(datasets, labels, 1);
    CHECK(m.feature == "pca_component_1");
    CHECK(m.entries[0][1] == m.entries[1][0]);
    CHECK(m.entries[0][0] == 0.0);

    // standardize() divides the separated coordinates by sqrt(sigma^2 + offset^2),
    // and the leading component carries the full shift delta
    const double expected = delta / std::sqrt(sigma * sigma + offset * offset);
    CHECK(m.entries[0][1] == doctest::Approx(expected).epsilon(0.05));

    // identical datasets -> zero matrix
    const auto zero = wasserstein_over_pca({datasets[0], datasets[0]}, labels, 2);
    CHECK(zero.entries[0][1] == doctest::Approx(0.0).epsilon(1e-12));
}
