#include "clbr/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "clbr/errors.hpp"
#include "clbr/rng.hpp"

namespace clbr {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (lr_decay <= 0.0) throw ConfigError("lr_decay must be positive");
    if (lr_decay_step < 1) throw ConfigError("lr_decay_step must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (minibatch_size < 1) throw ConfigError("minibatch_size must be >= 1");
    if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
    if (layers < 0) throw ConfigError("layers must be >= 0");
    if (pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be >= 0");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    loss.validate();
    augment.validate();
}

OptimizerState make_optimizer_state(Eigen::Index rows, Eigen::Index cols) {
    OptimizerState state;
    state.first_moment = Matrix::Zero(rows, cols);
    state.second_moment = Matrix::Zero(rows, cols);
    return state;
}

void adam_step(EmbeddingTable& params, const Matrix& grads, OptimizerState& state, double lr) {
    if (grads.rows() != params.values.rows() || grads.cols() != params.values.cols()) {
        throw DataError("adam_step: gradient shape does not match the parameter table");
    }
    state.step += 1;
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
    state.second_moment =
        state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseProduct(grads);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    params.values.array() -= lr * (state.first_moment.array() / bc1) /
                             ((state.second_moment.array() / bc2).sqrt() + state.epsilon);
}

namespace {

std::vector<std::vector<NodeId>> positives_by_user(const TripartiteGraph& graph) {
    std::vector<std::vector<NodeId>> positives(graph.space().num_users);
    for (Edge e : graph.edges(RelationKind::UB).pairs) positives[e.src].push_back(e.dst);
    return positives;  // per-user lists inherit the canonical edge order (ascending)
}

double validation_recall(const EmbeddingTable& params, const TripartiteGraph& graph, int layers,
                         const ValidationContext& ctx) {
    MetricsReport report = evaluate(params, graph, layers, *ctx.relevant, {ctx.k}, 0);
    return report.recall_at(ctx.k);
}

}  // namespace

TrainedModel train(const TripartiteGraph& graph, const std::vector<CounterfactualView>& views,
                   const TrainConfig& cfg, const ValidationContext* validation) {
    cfg.validate();
    const bool use_constraint = cfg.loss.omega_u > 0.0 || cfg.loss.omega_b > 0.0;
    if (use_constraint && views.empty()) {
        throw ConfigError("training with nonzero constraint weights requires at least one view");
    }
    const EdgeList& ub = graph.edges(RelationKind::UB).pairs;
    if (ub.empty()) throw DataError("training requires a nonempty user-bundle edge set");

    const NodeSpace& space = graph.space();
    const PropagationMatrix op_factual = normalized_adjacency(graph);
    std::vector<PropagationMatrix> op_views;
    if (use_constraint) {
        op_views.reserve(views.size());
        for (const auto& v : views) op_views.push_back(normalized_adjacency(v.graph));
    }

    const std::vector<std::vector<NodeId>> positives = positives_by_user(graph);
    for (NodeId u = 0; u < space.num_users; ++u) {
        if (static_cast<NodeId>(positives[u].size()) >= space.num_bundles) {
            throw DataError("user " + std::to_string(u) +
                            " interacts with every bundle; negative sampling cannot proceed");
        }
    }

    EmbeddingTable params =
        init_embeddings(space, cfg.embedding_dim, derive_seed(cfg.seed, "init"));
    OptimizerState opt = make_optimizer_state(params.values.rows(), params.values.cols());

    // Independent streams keep the shuffle and negative draws identical
    // whether or not views are in play.
    RngStream shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    RngStream neg_rng(derive_seed(cfg.seed, "negatives"));
    RngStream view_rng(derive_seed(cfg.seed, "view_choice"));

    std::vector<std::size_t> order(ub.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainedModel model;
    model.config = cfg;

    double best_recall = -1.0;
    Matrix best_params;
    int stale_epochs = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr =
            cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch / cfg.lr_decay_step));
        const int view_index =
            views.empty() ? -1 : static_cast<int>(view_rng.uniform_index(views.size()));

        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);
        }

        LossBreakdown epoch_sum;
        int batch_count = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.minibatch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.minibatch_size));
            std::vector<TrainBatch::Triple> triples;
            triples.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const Edge e = ub[order[i]];
                NodeId neg;
                do {
                    neg = static_cast<NodeId>(neg_rng.uniform_index(space.num_bundles));
                } while (std::binary_search(positives[e.src].begin(), positives[e.src].end(), neg));
                triples.push_back(TrainBatch::Triple{e.src, e.dst, neg});
            }
            const TrainBatch batch = make_train_batch(std::move(triples));

            const PropagatedEmbeddings factual = propagate(params, op_factual, space, cfg.layers);
            PropagatedEmbeddings view_prop;
            const PropagatedEmbeddings* view_ptr = nullptr;
            if (use_constraint) {
                view_prop = propagate(params, op_views[view_index], space, cfg.layers);
                view_ptr = &view_prop;
            }
            LossGradients grads = loss_gradients(batch, factual, view_ptr, cfg.loss);
            if (!std::isfinite(grads.breakdown.total)) {
                throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_count));
            }

            Matrix d_theta = backpropagate(grads.d_factual, op_factual, cfg.layers);
            if (use_constraint) {
                d_theta += backpropagate(grads.d_view, op_views[view_index], cfg.layers);
            }
            adam_step(params, d_theta, opt, lr);

            epoch_sum.l_task += grads.breakdown.l_task;
            epoch_sum.l_u += grads.breakdown.l_u;
            epoch_sum.l_b += grads.breakdown.l_b;
            epoch_sum.total += grads.breakdown.total;
            ++batch_count;
        }

        EpochLog log;
        log.epoch = epoch;
        log.view_index = view_index;
        log.lr = lr;
        if (batch_count > 0) {
            log.l_task = epoch_sum.l_task / batch_count;
            log.l_u = epoch_sum.l_u / batch_count;
            log.l_b = epoch_sum.l_b / batch_count;
            log.total = epoch_sum.total / batch_count;
        }
        model.history.push_back(log);

        if (cfg.early_stopping && validation != nullptr && validation->relevant != nullptr) {
            const double recall = validation_recall(params, graph, cfg.layers, *validation);
            if (recall > best_recall) {
                best_recall = recall;
                best_params = params.values;
                stale_epochs = 0;
            } else if (++stale_epochs >= cfg.patience) {
                params.values = best_params;
                break;
            }
        }
    }

    model.params = std::move(params);
    return model;
}

PropagatedEmbeddings pretrain_selection_model(const TripartiteGraph& graph,
                                              const TrainConfig& cfg) {
    TrainConfig selection_cfg = cfg;
    selection_cfg.epochs = cfg.pretrain_epochs;
    selection_cfg.loss.omega_u = 0.0;
    selection_cfg.loss.omega_b = 0.0;
    selection_cfg.early_stopping = false;
    selection_cfg.seed = derive_seed(cfg.seed, "pretrain");

    const TrainedModel model = train(graph, {}, selection_cfg);
    return propagate(model.params, normalized_adjacency(graph), graph.space(), cfg.layers);
}

}  // namespace clbr
