#pragma once

// Linear graph encoder: an embedding table propagated over the normalized
// adjacency with mean-of-layers combination, plus the inner-product
// predictor. The encoder has no per-layer weights, so its adjoint is the
// same operator and every gradient stays analytic.

#include <Eigen/Dense>
#include <cstdint>

#include "clbr/graph.hpp"

namespace clbr {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// The model parameters: one row of dimension D per node, users first,
// then items, then bundles (global index order).
struct EmbeddingTable {
    Matrix values;  // (N+L+K) x D

    std::int64_t rows() const { return values.rows(); }
    int dim() const { return static_cast<int>(values.cols()); }
};

// Gaussian init, mean 0 / std 0.1.
EmbeddingTable init_embeddings(const NodeSpace& space, int dim, std::uint64_t seed);

// Mean over layer outputs E^(0..layers) with E^(l+1) = op * E^(l),
// partitioned by node-type ranges.
struct PropagatedEmbeddings {
    Matrix values;  // (N+L+K) x D
    NodeSpace space;
    int layer_count = 0;

    auto users() const { return values.topRows(space.num_users); }
    auto items() const { return values.middleRows(space.num_users, space.num_items); }
    auto bundles() const { return values.bottomRows(space.num_bundles); }

    RowVector user_row(NodeId u) const { return values.row(space.global_user(u)); }
    RowVector item_row(NodeId i) const { return values.row(space.global_item(i)); }
    RowVector bundle_row(NodeId b) const { return values.row(space.global_bundle(b)); }
};

PropagatedEmbeddings propagate(const EmbeddingTable& params, const PropagationMatrix& op,
                               const NodeSpace& space, int layers);

// Adjoint of propagate: maps dLoss/dEncoder(X) to dLoss/dX. Exact because
// propagation is linear and the operator is symmetric.
Matrix backpropagate(const Matrix& grad_out, const PropagationMatrix& op, int layers);

double predict_score(const RowVector& user_emb, const RowVector& bundle_emb);

// Each nonzero row scaled to unit L2 norm; zero rows pass through unchanged.
Matrix row_normalize(const Matrix& block);

}  // namespace clbr
