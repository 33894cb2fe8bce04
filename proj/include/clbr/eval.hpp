#pragma once

// Ranking metrics over held-out user-bundle interactions, the per-user
// dataset split, the sample-complexity bound, and empirical oracles for
// the variance/uniformity identities behind the constraint loss.

#include <cstdint>
#include <vector>

#include "clbr/encoder.hpp"
#include "clbr/graph.hpp"

namespace clbr {

struct SplitSpec {
    double train_fraction = 0.7;
    double validation_fraction = 0.1;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitResult {
    TripartiteGraph train_graph;                 // train UB edges + all UI/BI edges
    std::vector<std::vector<NodeId>> validation; // per user, ascending bundle ids
    std::vector<std::vector<NodeId>> test;
};

// Per-user random partition of UB edges. Rounding: validation and test get
// llround(fraction * n); train receives the remainder and keeps at least
// one interaction. Users with fewer than 3 interactions keep everything
// in train.
SplitResult split(const TripartiteGraph& graph, const SplitSpec& spec);

// All bundles minus the exclusions, by score descending; ties break toward
// the smaller bundle id.
std::vector<NodeId> rank_bundles(const PropagatedEmbeddings& model, NodeId user,
                                 const std::vector<NodeId>& exclude);

double recall_at_k(const std::vector<NodeId>& ranked, const std::vector<NodeId>& relevant, int k);
double ndcg_at_k(const std::vector<NodeId>& ranked, const std::vector<NodeId>& relevant, int k);

struct MetricsReport {
    std::vector<int> ks;
    std::vector<double> recall_mean;                   // aligned with ks
    std::vector<double> ndcg_mean;                     // aligned with ks
    std::vector<std::vector<double>> recall_per_user;  // [k][evaluated user]
    std::vector<std::vector<double>> ndcg_per_user;
    std::vector<NodeId> evaluated_users;
    std::uint64_t seed = 0;

    double recall_at(int k) const;
    double ndcg_at(int k) const;
};

// Users with an empty test set are skipped, not zero-scored. Ranking
// excludes each user's training positives.
MetricsReport evaluate(const EmbeddingTable& params, const TripartiteGraph& train_graph,
                       int layers, const std::vector<std::vector<NodeId>>& test_sets,
                       const std::vector<int>& ks, std::uint64_t seed);

struct SampleComplexityQuery {
    double epsilon = 0.1;          // target error, in (0,1)
    double delta = 0.05;           // failure probability, in (0,1)
    double eta = 0.1;              // sampler noise level, in (0,0.5)
    double hypothesis_count = 1e6; // |H| >= 1

    void validate() const;
};

// 2*ln(2|H|/delta) / (eps^2 (1-2*eta)^2), natural log.
double sample_complexity_bound(const SampleComplexityQuery& q);
std::int64_t sample_complexity(const SampleComplexityQuery& q);

// sum over i != j of exp(a_j . b_i / tau) / rows. This is the unrestraint
// part of the constraint loss with its sign flipped positive.
double unrestraint_term(const Matrix& a_rows, const Matrix& b_rows, double tau);

// |sum_i ||c_i - f_i||^2 - (2N + 2 sum_i D_lin(c_i, f_i))| with the linear
// distance D_lin(a,b) = -a.b; exactly zero for unit rows up to rounding.
double consistency_identity_residual(const Matrix& view_rows, const Matrix& factual_rows);

struct LemmaDiagnostics {
    double identity_residual_max = 0.0;       // worst view vs factual
    double covariance_trace_error_max = 0.0;  // worst | trace(U^T U) - N |
    double eigenvalue_spread = 0.0;           // covariance of first view
    double unrestraint_actual = 0.0;          // first view vs factual
    double unrestraint_clustered = 0.0;       // narrow-cluster control batch
};

// Requires unit-normalized rows and at least two views.
LemmaDiagnostics lemma_oracles(const Matrix& factual_rows, const std::vector<Matrix>& view_rows,
                               double tau);

}  // namespace clbr
