#include "clbr/eval.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "clbr/errors.hpp"
#include "clbr/rng.hpp"

namespace clbr {

void SplitSpec::validate() const {
    if (train_fraction < 0.0 || validation_fraction < 0.0 || test_fraction < 0.0) {
        throw ConfigError("split fractions must be non-negative");
    }
    const double sum = train_fraction + validation_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));
    }
}

SplitResult split(const TripartiteGraph& graph, const SplitSpec& spec) {
    spec.validate();
    const NodeSpace& space = graph.space();
    const EdgeList& ub = graph.edges(RelationKind::UB).pairs;
    if (ub.empty()) throw DataError("split requires a nonempty user-bundle edge set");

    // Edges are sorted by user, so gather per-user interaction lists.
    std::vector<std::vector<NodeId>> per_user(space.num_users);
    for (Edge e : ub) per_user[e.src].push_back(e.dst);

    RngStream rng(spec.seed);
    EdgeList train_edges;
    train_edges.reserve(ub.size());
    SplitResult result;
    result.validation.resize(space.num_users);
    result.test.resize(space.num_users);

    for (NodeId u = 0; u < space.num_users; ++u) {
        auto& bundles = per_user[u];
        const auto n = static_cast<std::int64_t>(bundles.size());
        if (n == 0) continue;
        if (n < 3) {
            for (NodeId b : bundles) train_edges.push_back(Edge{u, b});
            continue;
        }
        for (std::int64_t i = n - 1; i > 0; --i) {
            std::swap(bundles[i], bundles[rng.uniform_index(static_cast<std::uint64_t>(i + 1))]);
        }
        std::int64_t n_val = std::llround(spec.validation_fraction * static_cast<double>(n));
        std::int64_t n_test = std::llround(spec.test_fraction * static_cast<double>(n));
        while (n - n_val - n_test < 1) {
            if (n_test > 0) {
                --n_test;
            } else {
                --n_val;
            }
        }
        const std::int64_t n_train = n - n_val - n_test;
        for (std::int64_t i = 0; i < n_train; ++i) train_edges.push_back(Edge{u, bundles[i]});
        for (std::int64_t i = n_train; i < n_train + n_val; ++i) {
            result.validation[u].push_back(bundles[i]);
        }
        for (std::int64_t i = n_train + n_val; i < n; ++i) result.test[u].push_back(bundles[i]);
        std::sort(result.validation[u].begin(), result.validation[u].end());
        std::sort(result.test[u].begin(), result.test[u].end());
    }

    result.train_graph = build_graph(space, train_edges, graph.edges(RelationKind::UI).pairs,
                                     graph.edges(RelationKind::BI).pairs);
    return result;
}

std::vector<NodeId> rank_bundles(const PropagatedEmbeddings& model, NodeId user,
                                 const std::vector<NodeId>& exclude) {
    const NodeSpace& space = model.space;
    if (user < 0 || user >= space.num_users) {
        throw DataError("rank_bundles: unknown user id " + std::to_string(user));
    }
    const auto u_row = model.values.row(space.global_user(user));

    std::vector<std::pair<double, NodeId>> scored;
    scored.reserve(space.num_bundles);
    for (NodeId b = 0; b < space.num_bundles; ++b) {
        if (std::binary_search(exclude.begin(), exclude.end(), b)) continue;
        scored.emplace_back(u_row.dot(model.values.row(space.global_bundle(b))), b);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<NodeId> ranked;
    ranked.reserve(scored.size());
    for (const auto& [score, b] : scored) ranked.push_back(b);
    return ranked;
}

double recall_at_k(const std::vector<NodeId>& ranked, const std::vector<NodeId>& relevant, int k) {
    if (k < 1) throw ConfigError("recall_at_k requires k >= 1");
    if (relevant.empty()) throw DataError("recall_at_k: empty relevant set (skip this user)");
    const auto top = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) {
        if (std::binary_search(relevant.begin(), relevant.end(), ranked[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<NodeId>& ranked, const std::vector<NodeId>& relevant, int k) {
    if (k < 1) throw ConfigError("ndcg_at_k requires k >= 1");
    if (relevant.empty()) throw DataError("ndcg_at_k: empty relevant set (skip this user)");
    const auto top = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
    double dcg = 0.0;
    for (std::size_t i = 0; i < top; ++i) {
        if (std::binary_search(relevant.begin(), relevant.end(), ranked[i])) {
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    const auto ideal =
        std::min<std::size_t>(relevant.size(), static_cast<std::size_t>(k));
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

double MetricsReport::recall_at(int k) const {
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == k) return recall_mean[i];
    }
    throw DataError("metrics report has no entry for k=" + std::to_string(k));
}

double MetricsReport::ndcg_at(int k) const {
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] == k) return ndcg_mean[i];
    }
    throw DataError("metrics report has no entry for k=" + std::to_string(k));
}

MetricsReport evaluate(const EmbeddingTable& params, const TripartiteGraph& train_graph,
                       int layers, const std::vector<std::vector<NodeId>>& test_sets,
                       const std::vector<int>& ks, std::uint64_t seed) {
    const NodeSpace& space = train_graph.space();
    if (static_cast<NodeId>(test_sets.size()) != space.num_users) {
        throw DataError("evaluate: test sets must have one entry per user");
    }
    const PropagationMatrix op = normalized_adjacency(train_graph);
    const PropagatedEmbeddings model = propagate(params, op, space, layers);

    std::vector<std::vector<NodeId>> train_positives(space.num_users);
    for (Edge e : train_graph.edges(RelationKind::UB).pairs) {
        train_positives[e.src].push_back(e.dst);
    }

    MetricsReport report;
    report.ks = ks;
    report.seed = seed;
    report.recall_per_user.resize(ks.size());
    report.ndcg_per_user.resize(ks.size());

    for (NodeId u = 0; u < space.num_users; ++u) {
        if (test_sets[u].empty()) continue;
        const std::vector<NodeId> ranked = rank_bundles(model, u, train_positives[u]);
        report.evaluated_users.push_back(u);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            report.recall_per_user[i].push_back(recall_at_k(ranked, test_sets[u], ks[i]));
            report.ndcg_per_user[i].push_back(ndcg_at_k(ranked, test_sets[u], ks[i]));
        }
    }

    for (std::size_t i = 0; i < ks.size(); ++i) {
        double r_sum = 0.0;
        double n_sum = 0.0;
        for (double v : report.recall_per_user[i]) r_sum += v;
        for (double v : report.ndcg_per_user[i]) n_sum += v;
        const double count = static_cast<double>(report.evaluated_users.size());
        report.recall_mean.push_back(count > 0 ? r_sum / count : 0.0);
        report.ndcg_mean.push_back(count > 0 ? n_sum / count : 0.0);
    }
    return report;
}

void SampleComplexityQuery::validate() const {
    if (epsilon <= 0.0 || epsilon >= 1.0) throw ConfigError("epsilon must lie in (0,1)");
    if (delta <= 0.0 || delta >= 1.0) throw ConfigError("delta must lie in (0,1)");
    if (eta <= 0.0 || eta >= 0.5) {
        throw ConfigError("eta must lie in (0,0.5); the bound diverges at eta = 0.5");
    }
    if (hypothesis_count < 1.0) throw ConfigError("hypothesis_count must be >= 1");
}

double sample_complexity_bound(const SampleComplexityQuery& q) {
    q.validate();
    const double one_minus = 1.0 - 2.0 * q.eta;
    return 2.0 * std::log(2.0 * q.hypothesis_count / q.delta) /
           (q.epsilon * q.epsilon * one_minus * one_minus);
}

std::int64_t sample_complexity(const SampleComplexityQuery& q) {
    return static_cast<std::int64_t>(std::ceil(sample_complexity_bound(q)));
}

double unrestraint_term(const Matrix& a_rows, const Matrix& b_rows, double tau) {
    if (a_rows.rows() != b_rows.rows() || a_rows.cols() != b_rows.cols()) {
        throw DataError("unrestraint_term: block shapes differ");
    }
    if (tau <= 0.0) throw ConfigError("temperature tau must be positive");
    const auto n = a_rows.rows();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) sum += std::exp(a_rows.row(j).dot(b_rows.row(i)) / tau);
        }
    }
    return sum / static_cast<double>(n);
}

double consistency_identity_residual(const Matrix& view_rows, const Matrix& factual_rows) {
    if (view_rows.rows() != factual_rows.rows() || view_rows.cols() != factual_rows.cols()) {
        throw DataError("consistency_identity_residual: block shapes differ");
    }
    const auto n = view_rows.rows();
    double sq_sum = 0.0;
    double dot_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sq_sum += (view_rows.row(i) - factual_rows.row(i)).squaredNorm();
        dot_sum += view_rows.row(i).dot(factual_rows.row(i));
    }
    // 2N + 2 * sum_i D_lin = 2N - 2 * sum_i c_i.f_i
    return std::abs(sq_sum - (2.0 * static_cast<double>(n) - 2.0 * dot_sum));
}

namespace {

void require_unit_rows(const Matrix& rows, const char* what) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        if (std::abs(rows.row(i).norm() - 1.0) > 1e-6) {
            throw DataError(std::string("lemma_oracles: ") + what + " row " + std::to_string(i) +
                            " is not unit-normalized");
        }
    }
}

// Same-size batch packed into a narrow cone around the first axis;
// deterministic so reruns agree.
Matrix clustered_control(Eigen::Index n, Eigen::Index dim) {
    RngStream rng(0x636c7573746572ULL);  // fixed internal stream
    Matrix rows(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        rows(i, 0) = 1.0;
        for (Eigen::Index c = 1; c < dim; ++c) rows(i, c) = rng.gaussian(0.0, 0.05);
        rows.row(i) /= rows.row(i).norm();
    }
    return rows;
}

}  // namespace

LemmaDiagnostics lemma_oracles(const Matrix& factual_rows, const std::vector<Matrix>& view_rows,
                               double tau) {
    if (view_rows.size() < 2) throw DataError("lemma_oracles requires at least two views");
    require_unit_rows(factual_rows, "factual");

    LemmaDiagnostics diag;
    const auto n = factual_rows.rows();
    diag.covariance_trace_error_max =
        std::abs(factual_rows.squaredNorm() - static_cast<double>(n));

    for (const Matrix& v : view_rows) {
        require_unit_rows(v, "view");
        if (v.rows() != n || v.cols() != factual_rows.cols()) {
            throw DataError("lemma_oracles: view block shape differs from factual block");
        }
        diag.identity_residual_max =
            std::max(diag.identity_residual_max, consistency_identity_residual(v, factual_rows));
        diag.covariance_trace_error_max =
            std::max(diag.covariance_trace_error_max,
                     std::abs(v.squaredNorm() - static_cast<double>(n)));
    }

    const Matrix cov = view_rows[0].transpose() * view_rows[0];
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
    const auto& eig = solver.eigenvalues();
    diag.eigenvalue_spread = eig.maxCoeff() - eig.minCoeff();

    diag.unrestraint_actual = unrestraint_term(view_rows[0], factual_rows, tau);
    const Matrix control = clustered_control(n, factual_rows.cols());
    diag.unrestraint_clustered = unrestraint_term(control, control, tau);
    return diag;
}

}  // namespace clbr
