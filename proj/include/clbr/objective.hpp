#pragma once

// Training objective: BPR ranking loss on the factual view plus the
// relaxed counterfactual constraint on user and bundle embeddings, with
// exact gradients w.r.t. the propagated (pre-normalization) embeddings.

#include <optional>
#include <vector>

#include "clbr/encoder.hpp"

namespace clbr {

struct LossConfig {
    double omega_u = 0.1;  // weight of the user-side constraint
    double omega_b = 0.1;  // weight of the bundle-side constraint
    // Self-adaptive threshold multipliers. Unset means 1/(rows-1), i.e. the
    // unrestraint term is averaged over the other rows of the minibatch.
    std::optional<double> lambda_u;
    std::optional<double> lambda_b;
    double tau = 1.0;  // temperature of the distance metric

    void validate() const;
};

struct LossBreakdown {
    double l_task = 0.0;
    double l_u = 0.0;
    double l_b = 0.0;
    double total = 0.0;
};

// D(e_i, e_j) = -exp(e_i . e_j / tau). Symmetric, strictly decreasing in
// the inner product.
double distance(const RowVector& e_i, const RowVector& e_j, double tau);

// Batch-mean constraint loss over paired rows of one node type:
//   (1/n) sum_i [ D(c_i, f_i) - lambda * sum_{j != i} D(c_j, f_i) ]
// Both blocks must hold the same minibatch rows, L2-normalized.
double constraint_loss(const Matrix& view_rows, const Matrix& factual_rows,
                       std::optional<double> lambda, double tau);

// Mean of -ln(sigmoid(s_pos - s_neg)); empty inputs are a DataError.
double bpr_loss(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

LossBreakdown total_loss(double l_task, double l_u, double l_b, const LossConfig& cfg);

// One training minibatch: BPR triples plus the constraint row sets derived
// from them (unique users, unique positive bundles, ascending order).
struct TrainBatch {
    struct Triple {
        NodeId user;
        NodeId pos_bundle;
        NodeId neg_bundle;
    };
    std::vector<Triple> triples;
    std::vector<NodeId> users;
    std::vector<NodeId> bundles;
};

TrainBatch make_train_batch(std::vector<TrainBatch::Triple> triples);

struct LossGradients {
    Matrix d_factual;  // dTotal / d(propagated factual table)
    Matrix d_view;     // dTotal / d(propagated view table); empty when no view
    LossBreakdown breakdown;
};

// view == nullptr skips the constraint entirely and requires omega == 0;
// this keeps the omega=0 path bit-identical to plain BPR training.
LossBreakdown compute_loss(const TrainBatch& batch, const PropagatedEmbeddings& factual,
                           const PropagatedEmbeddings* view, const LossConfig& cfg);

// Exact gradients of the total objective, including the normalization
// Jacobian; no stop-gradients anywhere.
LossGradients loss_gradients(const TrainBatch& batch, const PropagatedEmbeddings& factual,
                             const PropagatedEmbeddings* view, const LossConfig& cfg);

}  // namespace clbr
