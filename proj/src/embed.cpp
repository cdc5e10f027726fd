#include "flowdist/embed.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "flowdist/util.hpp"

namespace flowdist {

std::string_view embed_method_name(EmbedMethod method) {
    switch (method) {
        case EmbedMethod::pca: return "pca";
        case EmbedMethod::lda: return "lda";
        case EmbedMethod::mds: return "mds";
        case EmbedMethod::spectral: return "spectral";
    }
    return "pca";
}

std::optional<EmbedMethod> embed_method_from_name(std::string_view name) {
    if (name == "pca") return EmbedMethod::pca;
    if (name == "lda") return EmbedMethod::lda;
    if (name == "mds") return EmbedMethod::mds;
    if (name == "spectral") return EmbedMethod::spectral;
    return std::nullopt;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::size_t kDim = kFeatureCount;

MatrixXd to_matrix(const StandardizedVectors& input) {
    MatrixXd x(static_cast<Eigen::Index>(input.values.size()), kDim);
    for (std::size_t i = 0; i < input.values.size(); ++i)
        for (std::size_t j = 0; j < kDim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = input.values[i][j];
    return x;
}

MatrixXd center_columns(MatrixXd x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    return x;
}

// first loading with magnitude above tolerance made positive
void fix_sign(VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

// eigen-decomposition of a symmetric matrix, eigenvalues descending,
// sign convention applied
struct SymEigen {
    VectorXd values;
    MatrixXd vectors;  // columns
};

SymEigen sym_eigen_desc(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw FlowdistError("eigen-decomposition failed");
    SymEigen out;
    const Eigen::Index n = m.rows();
    out.values = solver.eigenvalues().reverse();
    out.vectors.resize(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        VectorXd v = solver.eigenvectors().col(n - 1 - c);
        fix_sign(v);
        out.vectors.col(c) = v;
    }
    return out;
}

std::vector<std::array<double, 2>> to_points(const MatrixXd& coords) {
    std::vector<std::array<double, 2>> points(static_cast<std::size_t>(coords.rows()));
    for (Eigen::Index i = 0; i < coords.rows(); ++i) points[static_cast<std::size_t>(i)] = {coords(i, 0), coords(i, 1)};
    return points;
}

}  // namespace

StandardizedVectors standardize(const std::vector<FeatureVector>& vectors) {
    if (vectors.size() < 2) throw FlowdistError("standardize: need at least 2 vectors");
    const double n = static_cast<double>(vectors.size());

    StandardizedVectors out;
    out.values.resize(vectors.size());
    out.labels.reserve(vectors.size());
    for (const auto& v : vectors) out.labels.push_back(v.dataset);

    for (std::size_t j = 0; j < kDim; ++j) {
        long double sum = 0;
        for (const auto& v : vectors) sum += v.values[j];
        const double mean = static_cast<double>(sum / n);
        long double var = 0;
        for (const auto& v : vectors) {
            const long double d = v.values[j] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(static_cast<double>(var / n));
        out.mean[j] = mean;
        out.scale[j] = sd;
        for (std::size_t i = 0; i < vectors.size(); ++i)
            out.values[i][j] = sd > 0 ? (vectors[i].values[j] - mean) / sd : 0.0;
    }
    return out;
}

EmbeddingResult pca_2d(const StandardizedVectors& input) {
    const std::size_t n = input.values.size();
    if (n < 3) throw FlowdistError("pca_2d: need at least 3 vectors");

    const MatrixXd xc = center_columns(to_matrix(input));
    const MatrixXd cov = (xc.transpose() * xc) / static_cast<double>(n - 1);
    const SymEigen eig = sym_eigen_desc(cov);

    if (eig.values[0] <= 0 || eig.values[1] <= 1e-12 * eig.values[0])
        throw FlowdistError("pca_2d: insufficient variance (rank < 2)");

    EmbeddingResult result;
    result.method = EmbedMethod::pca;
    result.points = to_points(xc * eig.vectors.leftCols(2));
    result.labels = input.labels;
    result.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
    return result;
}

EmbeddingResult lda_2d(const StandardizedVectors& input) {
    const std::size_t n = input.values.size();
    if (n < 2) throw FlowdistError("lda_2d: need at least 2 vectors");

    // class index per vector, classes in first-appearance order
    std::vector<std::string> class_names;
    std::vector<std::size_t> class_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto it = std::find(class_names.begin(), class_names.end(), input.labels[i]);
        if (it == class_names.end()) {
            class_of[i] = class_names.size();
            class_names.push_back(input.labels[i]);
        } else {
            class_of[i] = static_cast<std::size_t>(it - class_names.begin());
        }
    }
    const std::size_t k = class_names.size();
    if (k < 2) throw FlowdistError("lda_2d: need at least 2 distinct labels");

    std::vector<std::size_t> class_size(k, 0);
    for (const auto c : class_of) ++class_size[c];
    for (std::size_t c = 0; c < k; ++c)
        if (class_size[c] < 2)
            throw FlowdistError("lda_2d: class '" + class_names[c] + "' has fewer than 2 vectors");

    const MatrixXd x = to_matrix(input);
    const Eigen::RowVectorXd grand_mean = x.colwise().mean();

    MatrixXd class_means = MatrixXd::Zero(static_cast<Eigen::Index>(k), kDim);
    for (std::size_t i = 0; i < n; ++i) class_means.row(static_cast<Eigen::Index>(class_of[i])) += x.row(static_cast<Eigen::Index>(i));
    for (std::size_t c = 0; c < k; ++c) class_means.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(class_size[c]);

    MatrixXd within = MatrixXd::Zero(kDim, kDim);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::RowVectorXd d = x.row(static_cast<Eigen::Index>(i)) - class_means.row(static_cast<Eigen::Index>(class_of[i]));
        within += d.transpose() * d;
    }
    MatrixXd between = MatrixXd::Zero(kDim, kDim);
    for (std::size_t c = 0; c < k; ++c) {
        const Eigen::RowVectorXd d = class_means.row(static_cast<Eigen::Index>(c)) - grand_mean;
        between += static_cast<double>(class_size[c]) * (d.transpose() * d);
    }

    EmbeddingResult result;
    result.method = EmbedMethod::lda;
    result.labels = input.labels;

    // regularize a singular within-class scatter
    {
        Eigen::SelfAdjointEigenSolver<MatrixXd> probe(within);
        const double max_ev = probe.eigenvalues().maxCoeff();
        const double min_ev = probe.eigenvalues().minCoeff();
        if (max_ev <= 0) {
            within = MatrixXd::Identity(kDim, kDim);
            result.notes["within_scatter"] = "zero; replaced by identity";
        } else if (min_ev <= 1e-12 * max_ev) {
            const double ridge = 1e-6 * within.trace() / static_cast<double>(kDim);
            within += ridge * MatrixXd::Identity(kDim, kDim);
            result.notes["within_scatter"] = "regularized";
        }
    }

    // whiten by Sw^{-1/2}, then eigen-decompose the mapped between scatter
    Eigen::SelfAdjointEigenSolver<MatrixXd> sw_eig(within);
    VectorXd inv_sqrt = sw_eig.eigenvalues();
    for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i) inv_sqrt[i] = 1.0 / std::sqrt(inv_sqrt[i]);
    const MatrixXd w_half = sw_eig.eigenvectors() * inv_sqrt.asDiagonal() * sw_eig.eigenvectors().transpose();
    const SymEigen disc = sym_eigen_desc(w_half * between * w_half);

    if (disc.values[0] <= 1e-12 * std::max(1.0, between.trace()))
        throw FlowdistError("lda_2d: no discriminative direction (identical class means)");

    const MatrixXd xc = center_columns(x);

    VectorXd axis1 = w_half * disc.vectors.col(0);
    fix_sign(axis1);
    const VectorXd coord1 = xc * axis1;

    VectorXd coord2;
    const bool second_discriminant_exists = k > 2 && disc.values[1] > 1e-12 * disc.values[0];
    if (second_discriminant_exists) {
        VectorXd axis2 = w_half * disc.vectors.col(1);
        fix_sign(axis2);
        coord2 = xc * axis2;
        result.eigenvalues = {disc.values[0], disc.values[1]};
    } else {
        // single discriminant: use the leading principal direction of the
        // residual after removing the discriminant component
        const VectorXd unit = axis1.normalized();
        const MatrixXd residual = xc - (xc * unit) * unit.transpose();
        const SymEigen res_eig = sym_eigen_desc((residual.transpose() * residual) / static_cast<double>(n > 1 ? n - 1 : 1));
        coord2 = residual * res_eig.vectors.col(0);
        result.eigenvalues = {disc.values[0]};
        result.notes["second_component"] = "residual_pca";
    }

    result.points.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        result.points[i] = {coord1[static_cast<Eigen::Index>(i)], coord2[static_cast<Eigen::Index>(i)]};
    return result;
}

EmbeddingResult mds_2d(const StandardizedVectors& input) {
    const std::size_t n = input.values.size();
    if (n < 3) throw FlowdistError("mds_2d: need at least 3 vectors");

    // Gram route: eigenpairs of Xc'Xc give the classical-MDS coordinates
    // Xc v with squared norm equal to the double-centered matrix eigenvalue.
    const MatrixXd xc = center_columns(to_matrix(input));
    const SymEigen eig = sym_eigen_desc(xc.transpose() * xc);

    if (eig.values[0] <= 0 || eig.values[1] <= 1e-12 * eig.values[0])
        throw FlowdistError("mds_2d: fewer than 2 positive eigenvalues");

    EmbeddingResult result;
    result.method = EmbedMethod::mds;
    result.points = to_points(xc * eig.vectors.leftCols(2));
    result.labels = input.labels;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        if (eig.values[i] > 0) result.eigenvalues.push_back(eig.values[i]);
    return result;
}

namespace {

// adjacency lists of the OR-symmetrized kNN graph; ties broken by index
std::vector<std::vector<std::uint32_t>> knn_graph(const MatrixXd& x, int k) {
    const Eigen::Index n = x.rows();
    std::vector<std::vector<std::uint32_t>> adjacency(static_cast<std::size_t>(n));
    std::vector<std::pair<double, std::uint32_t>> candidates;
    candidates.reserve(static_cast<std::size_t>(n));

    for (Eigen::Index i = 0; i < n; ++i) {
        candidates.clear();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            candidates.emplace_back((x.row(i) - x.row(j)).squaredNorm(), static_cast<std::uint32_t>(j));
        }
        const auto kth = candidates.begin() + std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(candidates.size()));
        std::partial_sort(candidates.begin(), kth, candidates.end());
        for (auto it = candidates.begin(); it != kth; ++it) {
            const auto a = static_cast<std::uint32_t>(i);
            const auto b = it->second;
            adjacency[a].push_back(b);
            adjacency[b].push_back(a);
        }
    }
    // dedupe mutual selections
    for (auto& neighbors : adjacency) {
        std::sort(neighbors.begin(), neighbors.end());
        neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());
    }
    return adjacency;
}

bool is_connected(const std::vector<std::vector<std::uint32_t>>& adjacency) {
    if (adjacency.empty()) return true;
    std::vector<char> seen(adjacency.size(), 0);
    std::queue<std::uint32_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const auto u = frontier.front();
        frontier.pop();
        for (const auto v : adjacency[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == adjacency.size();
}

// normalized Laplacian as a sparse operator: y = x - D^{-1/2} A D^{-1/2} x
struct LaplacianOp {
    const std::vector<std::vector<std::uint32_t>>& adjacency;
    VectorXd inv_sqrt_degree;

    explicit LaplacianOp(const std::vector<std::vector<std::uint32_t>>& adj) : adjacency(adj) {
        inv_sqrt_degree.resize(static_cast<Eigen::Index>(adj.size()));
        for (std::size_t i = 0; i < adj.size(); ++i)
            inv_sqrt_degree[static_cast<Eigen::Index>(i)] = 1.0 / std::sqrt(static_cast<double>(adj[i].size()));
    }

    // y = (2I - L_sym) x, shifting so the wanted small eigenvalues become large
    VectorXd shifted_apply(const VectorXd& x) const {
        VectorXd y(x.size());
        for (std::size_t i = 0; i < adjacency.size(); ++i) {
            double acc = 0;
            for (const auto j : adjacency[i]) acc += inv_sqrt_degree[static_cast<Eigen::Index>(j)] * x[static_cast<Eigen::Index>(j)];
            const auto ei = static_cast<Eigen::Index>(i);
            y[ei] = x[ei] + inv_sqrt_degree[ei] * acc;
        }
        return y;
    }
};

struct SmallestEigenpairs {
    std::vector<double> eigenvalues;  // ascending, includes the trivial 0
    MatrixXd vectors;                 // columns matching eigenvalues
};

// dense path for small graphs
SmallestEigenpairs laplacian_smallest_dense(const std::vector<std::vector<std::uint32_t>>& adjacency,
                                            std::size_t want) {
    const auto n = static_cast<Eigen::Index>(adjacency.size());
    MatrixXd lap = MatrixXd::Identity(n, n);
    LaplacianOp op(adjacency);
    for (std::size_t i = 0; i < adjacency.size(); ++i)
        for (const auto j : adjacency[i])
            lap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -=
                op.inv_sqrt_degree[static_cast<Eigen::Index>(i)] * op.inv_sqrt_degree[static_cast<Eigen::Index>(j)];

    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(lap);
    SmallestEigenpairs out;
    out.vectors.resize(n, static_cast<Eigen::Index>(want));
    for (std::size_t c = 0; c < want; ++c) {
        out.eigenvalues.push_back(solver.eigenvalues()[static_cast<Eigen::Index>(c)]);
        VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(c));
        fix_sign(v);
        out.vectors.col(static_cast<Eigen::Index>(c)) = v;
    }
    return out;
}

// Lanczos with full reorthogonalization on 2I - L_sym, deflating the known
// null-space vector D^{1/2} 1. Breakdown (an exhausted invariant subspace,
// e.g. on graphs with degenerate spectra) restarts with a fresh deflated
// vector; the tridiagonal then decouples at a zero off-diagonal entry.
// Deterministic: fixed-seed start vectors, fixed iteration order.
SmallestEigenpairs laplacian_smallest_lanczos(const std::vector<std::vector<std::uint32_t>>& adjacency,
                                              std::size_t want) {
    const auto n = static_cast<Eigen::Index>(adjacency.size());
    LaplacianOp op(adjacency);

    VectorXd null_vec(n);
    for (Eigen::Index i = 0; i < n; ++i) null_vec[i] = 1.0 / op.inv_sqrt_degree[i];
    null_vec.normalize();

    std::mt19937_64 start_gen(20240817ull);
    std::vector<VectorXd> basis;
    std::vector<double> alpha, beta;

    const auto fresh_vector = [&]() -> std::optional<VectorXd> {
        for (int attempt = 0; attempt < 8; ++attempt) {
            VectorXd q(n);
            for (Eigen::Index i = 0; i < n; ++i) q[i] = rng::unit(start_gen) - 0.5;
            q -= null_vec.dot(q) * null_vec;
            for (const auto& b : basis) q -= b.dot(q) * b;
            const double norm = q.norm();
            if (norm > 1e-8) return q / norm;
        }
        return std::nullopt;  // basis already spans the complement
    };

    const int steps = static_cast<int>(std::min<Eigen::Index>(n - 1, 160));
    auto q0 = fresh_vector();
    if (q0) basis.push_back(*q0);
    for (int step = 0; step < steps && !basis.empty(); ++step) {
        VectorXd w = op.shifted_apply(basis.back());
        alpha.push_back(basis.back().dot(w));
        // full reorthogonalization against everything kept so far
        w -= null_vec.dot(w) * null_vec;
        for (const auto& b : basis) w -= b.dot(w) * b;
        w -= null_vec.dot(w) * null_vec;
        for (const auto& b : basis) w -= b.dot(w) * b;
        if (step + 1 == steps) break;
        const double b_norm = w.norm();
        if (b_norm >= 1e-10) {
            beta.push_back(b_norm);
            basis.push_back(w / b_norm);
        } else {
            const auto restart = fresh_vector();
            if (!restart) break;
            beta.push_back(0.0);
            basis.push_back(*restart);
        }
    }

    const auto m = static_cast<Eigen::Index>(alpha.size());
    if (m < static_cast<Eigen::Index>(want) - 1)
        throw FlowdistError("spectral_2d: eigensolver basis too small");
    MatrixXd tri = MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        tri(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) {
            tri(i, i + 1) = beta[static_cast<std::size_t>(i)];
            tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(tri);

    SmallestEigenpairs out;
    out.eigenvalues.push_back(0.0);  // trivial eigenvalue, deflated
    out.vectors.resize(n, static_cast<Eigen::Index>(want));
    {
        VectorXd v = null_vec;
        fix_sign(v);
        out.vectors.col(0) = v;
    }
    for (std::size_t c = 1; c < want; ++c) {
        const Eigen::Index ritz_idx = m - static_cast<Eigen::Index>(c);  // largest of the shifted operator
        out.eigenvalues.push_back(2.0 - ritz.eigenvalues()[ritz_idx]);
        VectorXd v = VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < m; ++i) v += ritz.eigenvectors()(i, ritz_idx) * basis[static_cast<std::size_t>(i)];
        v.normalize();
        fix_sign(v);
        out.vectors.col(static_cast<Eigen::Index>(c)) = v;
    }
    return out;
}

}  // namespace

EmbeddingResult spectral_2d(const StandardizedVectors& input, int k_neighbors) {
    const std::size_t n = input.values.size();
    if (k_neighbors < 1) throw FlowdistError("spectral_2d: k must be >= 1");
    if (n < static_cast<std::size_t>(k_neighbors) + 1)
        throw FlowdistError("spectral_2d: need at least k+1 vectors");
    if (n < 3) throw FlowdistError("spectral_2d: need at least 3 vectors");

    const MatrixXd x = to_matrix(input);
    const auto adjacency = knn_graph(x, k_neighbors);
    if (!is_connected(adjacency))
        throw FlowdistError("spectral_2d: graph disconnected; increase k");

    constexpr std::size_t want = 4;  // trivial + 2 coordinates + 1 diagnostic
    const std::size_t avail = std::min(want, n);
    const SmallestEigenpairs pairs = n <= 2048 ? laplacian_smallest_dense(adjacency, avail)
                                               : laplacian_smallest_lanczos(adjacency, avail);

    EmbeddingResult result;
    result.method = EmbedMethod::spectral;
    result.labels = input.labels;
    result.eigenvalues = pairs.eigenvalues;
    result.points.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        result.points[i] = {pairs.vectors(static_cast<Eigen::Index>(i), 1),
                            pairs.vectors(static_cast<Eigen::Index>(i), 2)};
    return result;
}

}  // namespace flowdist
