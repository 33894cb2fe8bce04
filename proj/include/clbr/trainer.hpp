#pragma once

// Training orchestration: pretrain the selection model with plain BPR,
// then run the main loop — per epoch pick one counterfactual view, and per
// minibatch propagate the shared parameters over both graphs, evaluate the
// constrained objective and take one Adam step.

#include <cstdint>
#include <vector>

#include "clbr/augment.hpp"
#include "clbr/encoder.hpp"
#include "clbr/eval.hpp"
#include "clbr/graph.hpp"
#include "clbr/objective.hpp"

namespace clbr {

struct TrainConfig {
    double learning_rate = 1e-3;
    double lr_decay = 1.0;     // multiplied in every lr_decay_step epochs
    int lr_decay_step = 3;
    int epochs = 100;
    int minibatch_size = 2048;
    int embedding_dim = 64;
    int layers = 2;
    std::uint64_t seed = 42;
    int pretrain_epochs = 100;
    bool early_stopping = false;  // on validation Recall@20; off for determinism
    int patience = 20;
    LossConfig loss;
    AugmentConfig augment;

    void validate() const;
};

struct OptimizerState {
    Matrix first_moment;
    Matrix second_moment;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

OptimizerState make_optimizer_state(Eigen::Index rows, Eigen::Index cols);

// Standard bias-corrected Adam update, elementwise and deterministic.
void adam_step(EmbeddingTable& params, const Matrix& grads, OptimizerState& state, double lr);

struct EpochLog {
    int epoch = 0;
    int view_index = -1;  // -1 when training without views
    double l_task = 0.0;
    double l_u = 0.0;
    double l_b = 0.0;
    double total = 0.0;
    double lr = 0.0;
};

struct TrainedModel {
    EmbeddingTable params;  // frozen after train() returns
    TrainConfig config;
    std::vector<EpochLog> history;
};

// Per-user validation bundles for optional early stopping.
struct ValidationContext {
    const std::vector<std::vector<NodeId>>* relevant = nullptr;
    int k = 20;
};

// Algorithm: each epoch draws one view uniformly (its own seed stream, so
// the omega=0 path is bit-identical to plain BPR training), shuffles the
// UB training edges, and per minibatch samples one negative bundle per
// positive. With constraint weights at zero the view machinery is skipped
// entirely; views may then be empty.
TrainedModel train(const TripartiteGraph& graph, const std::vector<CounterfactualView>& views,
                   const TrainConfig& cfg, const ValidationContext* validation = nullptr);

// Plain-BPR model of identical architecture trained on the factual graph;
// returns its propagated embeddings for the heuristic sampler.
PropagatedEmbeddings pretrain_selection_model(const TripartiteGraph& graph,
                                              const TrainConfig& cfg);

}  // namespace clbr
