#include "flowdist/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "flowdist/embed.hpp"

namespace flowdist {

double wasserstein_1d(std::span<const double> u, std::span<const double> v) {
    if (u.empty() || v.empty()) throw FlowdistError("wasserstein_1d: empty sample");

    std::vector<double> su(u.begin(), u.end());
    std::vector<double> sv(v.begin(), v.end());
    std::sort(su.begin(), su.end());
    std::sort(sv.begin(), sv.end());

    const double nu = static_cast<double>(su.size());
    const double nv = static_cast<double>(sv.size());

    // sweep the pooled support; between consecutive distinct values the CDF
    // difference is constant
    double total = 0;
    std::size_t i = 0, j = 0;
    double prev = 0;
    bool have_prev = false;
    while (i < su.size() || j < sv.size()) {
        double x;
        if (i < su.size() && j < sv.size())
            x = std::min(su[i], sv[j]);
        else if (i < su.size())
            x = su[i];
        else
            x = sv[j];

        if (have_prev && x > prev) {
            const double diff = std::abs(static_cast<double>(i) / nu - static_cast<double>(j) / nv);
            total += diff * (x - prev);
        }
        while (i < su.size() && su[i] == x) ++i;
        while (j < sv.size() && sv[j] == x) ++j;
        prev = x;
        have_prev = true;
    }
    return total;
}

MinMaxRange normalize_features(std::vector<FeatureSample>& samples) {
    if (samples.empty()) throw FlowdistError("normalize_features: need at least one sample");

    MinMaxRange range;
    bool any = false;
    for (const auto& s : samples) {
        for (const double v : s.values) {
            if (!any) {
                range.min = range.max = v;
                any = true;
            } else {
                range.min = std::min(range.min, v);
                range.max = std::max(range.max, v);
            }
        }
    }
    if (!any) {
        range.degenerate = true;
        return range;
    }
    const double width = range.max - range.min;
    range.degenerate = width <= 0;
    for (auto& s : samples)
        for (double& v : s.values) v = range.degenerate ? 0.0 : (v - range.min) / width;
    return range;
}

namespace {

DistanceMatrix pairwise_matrix_impl(const std::vector<FeatureSample>& datasets, std::string feature_tag) {
    if (datasets.size() < 2) throw FlowdistError("pairwise_distance_matrix: need at least 2 datasets");

    DistanceMatrix m;
    m.feature = std::move(feature_tag);
    for (const auto& s : datasets) {
        if (s.values.empty())
            throw FlowdistError("feature " + m.feature + " unavailable for dataset '" + s.dataset + "'");
        m.labels.push_back(s.dataset);
    }

    const std::size_t n = datasets.size();
    m.entries.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = wasserstein_1d(datasets[i].values, datasets[j].values);
            m.entries[i][j] = d;
            m.entries[j][i] = d;
        }
    }
    return m;
}

}  // namespace

DistanceMatrix pairwise_distance_matrix(const std::vector<FeatureSample>& datasets, FeatureId feature) {
    return pairwise_matrix_impl(datasets, std::string(feature_name(feature)));
}

DistanceMatrix averaged_distance_matrix(const std::vector<DistanceMatrix>& per_feature) {
    if (per_feature.empty()) throw FlowdistError("averaged_distance_matrix: no matrices");
    const auto& labels = per_feature.front().labels;
    for (const auto& m : per_feature)
        if (m.labels != labels)
            throw FlowdistError("averaged_distance_matrix: label mismatch between per-feature matrices");

    DistanceMatrix avg;
    avg.labels = labels;
    avg.feature = "averaged";
    const std::size_t n = labels.size();
    avg.entries.assign(n, std::vector<double>(n, 0.0));
    for (const auto& m : per_feature)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) avg.entries[i][j] += m.entries[i][j];
    const double count = static_cast<double>(per_feature.size());
    for (auto& row : avg.entries)
        for (double& v : row) v /= count;
    return avg;
}

ScatterCoordinates reference_scatter(const DistanceMatrix& averaged, const std::string& ref1,
                                     const std::string& ref2) {
    const auto index_of = [&](const std::string& name) {
        const auto it = std::find(averaged.labels.begin(), averaged.labels.end(), name);
        if (it == averaged.labels.end())
            throw FlowdistError("reference_scatter: unknown reference dataset '" + name + "'");
        return static_cast<std::size_t>(it - averaged.labels.begin());
    };
    const std::size_t i1 = index_of(ref1);
    const std::size_t i2 = index_of(ref2);

    ScatterCoordinates sc;
    sc.ref1 = ref1;
    sc.ref2 = ref2;
    sc.labels = averaged.labels;
    sc.coords.reserve(averaged.labels.size());
    for (std::size_t d = 0; d < averaged.labels.size(); ++d)
        sc.coords.push_back({averaged.entries[d][i1], averaged.entries[d][i2]});
    return sc;
}

namespace {

// midranks of the pooled values (average rank across ties), plus the tie
// correction term sum(t^3 - t)
struct RankedPool {
    std::vector<double> ranks;  // parallel to the pooled value order
    double tie_term = 0;
};

RankedPool midranks(std::vector<std::pair<double, std::size_t>>& pool) {
    std::sort(pool.begin(), pool.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    RankedPool out;
    out.ranks.resize(pool.size());
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j < pool.size() && pool[j].first == pool[i].first) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) out.ranks[t] = avg_rank;
        const double ties = static_cast<double>(j - i);
        out.tie_term += ties * ties * ties - ties;
        i = j;
    }
    return out;
}

}  // namespace

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw FlowdistError("kruskal_wallis: need at least 2 groups");
    std::size_t total = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) throw FlowdistError("kruskal_wallis: empty group");
        total += groups[g].size();
    }
    if (total < 3) throw FlowdistError("kruskal_wallis: need at least 3 values in total");

    std::vector<std::pair<double, std::size_t>> pool;
    pool.reserve(total);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (const double v : groups[g]) pool.emplace_back(v, g);

    const RankedPool ranked = midranks(pool);

    const double n = static_cast<double>(total);
    const double correction = 1.0 - ranked.tie_term / (n * n * n - n);
    if (correction <= 0) throw FlowdistError("kruskal_wallis: degenerate ties (all values identical)");

    std::vector<double> rank_sum(groups.size(), 0.0);
    for (std::size_t idx = 0; idx < pool.size(); ++idx) rank_sum[pool[idx].second] += ranked.ranks[idx];

    double h = 0;
    for (std::size_t g = 0; g < groups.size(); ++g)
        h += rank_sum[g] * rank_sum[g] / static_cast<double>(groups[g].size());
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    h /= correction;

    KruskalWallisResult result;
    result.h_statistic = h;
    result.df = groups.size() - 1;
    result.tie_correction = correction;
    result.p_value = chi_squared_sf(h, static_cast<double>(result.df));
    return result;
}

namespace {

// regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x):
// series expansion for x < a+1, Lentz continued fraction otherwise
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi_squared_sf(double x, double degrees_of_freedom) {
    if (degrees_of_freedom <= 0) throw FlowdistError("chi_squared_sf: df must be positive");
    if (x <= 0) return 1.0;
    const double a = degrees_of_freedom / 2.0;
    const double half_x = x / 2.0;
    if (half_x < a + 1.0) return 1.0 - gamma_p_series(a, half_x);
    return gamma_q_contfrac(a, half_x);
}

DistanceMatrix wasserstein_over_pca(const std::vector<std::vector<FeatureVector>>& datasets,
                                    const std::vector<std::string>& labels, int component) {
    if (component != 1 && component != 2)
        throw FlowdistError("wasserstein_over_pca: component must be 1 or 2");
    if (datasets.size() != labels.size() || datasets.size() < 2)
        throw FlowdistError("wasserstein_over_pca: need >= 2 labeled datasets");

    std::vector<FeatureVector> pooled;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (const auto& v : datasets[d]) {
            pooled.push_back(v);
            pooled.back().dataset = labels[d];
        }
    }

    const auto embedded = pca_2d(standardize(pooled));

    std::vector<FeatureSample> scores(datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) scores[d].dataset = labels[d];
    std::size_t cursor = 0;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (std::size_t i = 0; i < datasets[d].size(); ++i, ++cursor)
            scores[d].values.push_back(embedded.points[cursor][static_cast<std::size_t>(component - 1)]);
    }

    return pairwise_matrix_impl(scores, "pca_component_" + std::to_string(component));
}

}  // namespace flowdist
