#include "clbr/encoder.hpp"

#include "clbr/errors.hpp"
#include "clbr/rng.hpp"

namespace clbr {

EmbeddingTable init_embeddings(const NodeSpace& space, int dim, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("embedding dimension must be >= 1, got " + std::to_string(dim));
    RngStream rng(seed);
    EmbeddingTable table;
    table.values.resize(space.total(), dim);
    // Row-major fill order so the draw sequence is independent of Eigen's
    // storage layout.
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            table.values(r, c) = rng.gaussian(0.0, 0.1);
        }
    }
    return table;
}

namespace {

Matrix mean_of_powers(const Matrix& input, const PropagationMatrix& op, int layers) {
    if (layers < 0) throw ConfigError("layers must be >= 0, got " + std::to_string(layers));
    if (op.weights.rows() != input.rows()) {
        throw DataError("propagation operator has " + std::to_string(op.weights.rows()) +
                        " rows but the table has " + std::to_string(input.rows()));
    }
    Matrix acc = input;
    Matrix cur = input;
    for (int l = 0; l < layers; ++l) {
        cur = op.weights * cur;
        acc += cur;
    }
    return acc / static_cast<double>(layers + 1);
}

}  // namespace

PropagatedEmbeddings propagate(const EmbeddingTable& params, const PropagationMatrix& op,
                               const NodeSpace& space, int layers) {
    if (params.rows() != space.total()) {
        throw DataError("embedding table has " + std::to_string(params.rows()) +
                        " rows, node space expects " + std::to_string(space.total()));
    }
    PropagatedEmbeddings out;
    out.values = mean_of_powers(params.values, op, layers);
    out.space = space;
    out.layer_count = layers;
    return out;
}

Matrix backpropagate(const Matrix& grad_out, const PropagationMatrix& op, int layers) {
    return mean_of_powers(grad_out, op, layers);
}

double predict_score(const RowVector& user_emb, const RowVector& bundle_emb) {
    if (user_emb.size() != bundle_emb.size()) {
        throw DataError("predict_score: dimension mismatch " + std::to_string(user_emb.size()) +
                        " vs " + std::to_string(bundle_emb.size()));
    }
    return user_emb.dot(bundle_emb);
}

Matrix row_normalize(const Matrix& block) {
    Matrix out = block;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double norm = out.row(r).norm();
        if (norm > 0.0) out.row(r) /= norm;
    }
    return out;
}

}  // namespace clbr
