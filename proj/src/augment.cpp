#include "clbr/augment.hpp"

#include <algorithm>
#include <cmath>

#include "clbr/errors.hpp"
#include "clbr/rng.hpp"

namespace clbr {

namespace {

std::uint64_t pair_key(Edge e) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.src)) << 32) |
           static_cast<std::uint32_t>(e.dst);
}

void canonicalize(EdgeList& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::int64_t selected_count(const ViewDelta& delta, RelationKind kind) {
    return static_cast<std::int64_t>(delta.adds_for(kind).size()) +
           static_cast<std::int64_t>(delta.drops_for(kind).size());
}

SelectionState make_state(const TripartiteGraph& graph, RelationKind kind, double quota,
                          double alpha) {
    SelectionState state;
    const NodeId s_count = graph.space().count(src_type(kind));
    const NodeId d_count = graph.space().count(dst_type(kind));
    state.remaining_degree[0].resize(s_count);
    state.remaining_degree[1].resize(d_count);
    for (NodeId i = 0; i < s_count; ++i) {
        state.remaining_degree[0][i] = graph.degree(kind, src_type(kind), i);
    }
    for (NodeId i = 0; i < d_count; ++i) {
        state.remaining_degree[1][i] = graph.degree(kind, dst_type(kind), i);
    }
    state.add_cap = static_cast<std::int64_t>(std::ceil(alpha * quota));
    state.drop_cap = static_cast<std::int64_t>(std::ceil((1.0 - alpha) * quota));
    return state;
}

}  // namespace

const char* sampler_name(SamplerKind kind) {
    return kind == SamplerKind::Heuristic ? "heuristic" : "stochastic";
}

SamplerKind parse_sampler(const std::string& name) {
    if (name == "heuristic") return SamplerKind::Heuristic;
    if (name == "stochastic") return SamplerKind::Stochastic;
    throw ConfigError("unknown sampler '" + name + "' (expected stochastic or heuristic)");
}

double AugmentConfig::ratio(RelationKind kind) const {
    switch (kind) {
        case RelationKind::UB: return r_ub;
        case RelationKind::UI: return r_ui;
        case RelationKind::BI: return r_bi;
    }
    return 0.0;
}

void AugmentConfig::validate() const {
    for (RelationKind kind : kAllRelations) {
        const double r = ratio(kind);
        if (r < 0.0 || r >= 1.0) {
            throw ConfigError(std::string("augmentation ratio r_") + relation_name(kind) +
                              " must lie in [0,1), got " + std::to_string(r));
        }
    }
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0,1]");
    if (alpha_plus <= 0.0 || alpha_minus <= 0.0) {
        throw ConfigError("alpha_plus and alpha_minus must be positive");
    }
    if (num_views < 1) throw ConfigError("num_views must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_batches < 1) throw ConfigError("max_batches must be >= 1");
}

BatchThresholds batch_thresholds(const std::vector<double>& scores, const AugmentConfig& cfg) {
    if (scores.empty()) throw DataError("cannot compute thresholds of an empty batch");
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    return BatchThresholds{cfg.alpha_plus * *hi, cfg.alpha_minus * *lo};
}

std::vector<double> relevance_scores(RelationKind kind, const EdgeList& pairs,
                                     const PropagatedEmbeddings& model) {
    const NodeSpace& space = model.space;
    const NodeId s_bound = space.count(src_type(kind));
    const NodeId d_bound = space.count(dst_type(kind));
    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (Edge e : pairs) {
        if (e.src < 0 || e.src >= s_bound || e.dst < 0 || e.dst >= d_bound) {
            throw DataError(std::string("relevance_scores: pair (") + std::to_string(e.src) +
                            ", " + std::to_string(e.dst) + ") out of bounds for relation " +
                            relation_name(kind));
        }
        const NodeId gi = space.global_id(src_type(kind), e.src);
        const NodeId gj = space.global_id(dst_type(kind), e.dst);
        scores.push_back(model.values.row(gi).dot(model.values.row(gj)));
    }
    return scores;
}

void select_pairs(RelationKind kind, const EdgeList& batch, const std::vector<double>& scores,
                  const BatchThresholds& thresholds, const TripartiteGraph& graph,
                  ViewDelta& delta, SelectionState* state) {
    if (batch.size() != scores.size()) {
        throw DataError("select_pairs: scores are not aligned with pairs");
    }
    EdgeList& adds = delta.adds_for(kind);
    EdgeList& drops = delta.drops_for(kind);

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Edge e = batch[i];
        const double score = scores[i];
        if (state != nullptr && state->chosen.contains(pair_key(e))) continue;

        const bool is_edge = graph.has_edge(kind, e);
        if (score > thresholds.kappa_plus && !is_edge) {
            if (state != nullptr) {
                if (static_cast<std::int64_t>(adds.size()) >= state->add_cap) continue;
                state->chosen.insert(pair_key(e));
            }
            adds.push_back(e);
        } else if (score <= thresholds.kappa_minus && is_edge) {
            if (state != nullptr) {
                if (static_cast<std::int64_t>(drops.size()) >= state->drop_cap) continue;
                // Never take a node's last edge in its relation.
                if (state->remaining_degree[0][e.src] <= 1 ||
                    state->remaining_degree[1][e.dst] <= 1) {
                    continue;
                }
                state->chosen.insert(pair_key(e));
                state->remaining_degree[0][e.src]--;
                state->remaining_degree[1][e.dst]--;
            }
            drops.push_back(e);
        }
    }
}

CounterfactualView heuristic_generate(const TripartiteGraph& factual,
                                      const PropagatedEmbeddings& selection_model,
                                      const AugmentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (selection_model.space != factual.space()) {
        throw DataError("selection model and factual graph disagree on the node space");
    }

    RngStream rng(seed);
    ViewDelta delta;
    for (RelationKind kind : kAllRelations) {
        const double quota = cfg.ratio(kind) * static_cast<double>(factual.edges(kind).size());
        if (quota <= 0.0) continue;

        const std::int64_t s_count = factual.space().count(src_type(kind));
        const std::int64_t d_count = factual.space().count(dst_type(kind));
        const std::int64_t total_pairs = s_count * d_count;

        SelectionState state = make_state(factual, kind, quota, cfg.alpha);

        int batches = 0;
        while (static_cast<double>(selected_count(delta, kind)) < quota) {
            if (++batches > cfg.max_batches) {
                throw DataError(std::string("heuristic sampler stalled on relation ") +
                                relation_name(kind) + ": reached " +
                                std::to_string(delta.adds_for(kind).size()) + " adds / " +
                                std::to_string(delta.drops_for(kind).size()) + " drops of quota " +
                                std::to_string(quota) + " after " +
                                std::to_string(cfg.max_batches) + " batches");
            }
            EdgeList batch;
            if (total_pairs <= cfg.batch_size) {
                // Whole candidate space fits one batch; enumerate it
                // (src-major) instead of sampling with replacement.
                batch.reserve(total_pairs);
                for (NodeId s = 0; s < s_count; ++s) {
                    for (NodeId d = 0; d < d_count; ++d) batch.push_back(Edge{s, d});
                }
            } else {
                batch.reserve(cfg.batch_size);
                for (int i = 0; i < cfg.batch_size; ++i) {
                    batch.push_back(Edge{static_cast<NodeId>(rng.uniform_index(s_count)),
                                         static_cast<NodeId>(rng.uniform_index(d_count))});
                }
            }
            const std::vector<double> scores = relevance_scores(kind, batch, selection_model);
            const BatchThresholds thresholds = batch_thresholds(scores, cfg);
            select_pairs(kind, batch, scores, thresholds, factual, delta, &state);
        }
    }

    for (int t = 0; t < 3; ++t) {
        canonicalize(delta.adds[t]);
        canonicalize(delta.drops[t]);
    }
    return CounterfactualView{delta, apply_delta(factual, delta), seed};
}

CounterfactualView stochastic_generate(const TripartiteGraph& factual, const AugmentConfig& cfg,
                                       std::uint64_t seed) {
    cfg.validate();
    RngStream rng(seed);
    ViewDelta delta;

    for (RelationKind kind : kAllRelations) {
        const std::int64_t edge_count = factual.edges(kind).size();
        const double quota = cfg.ratio(kind) * static_cast<double>(edge_count);
        if (quota <= 0.0) continue;

        const std::int64_t s_count = factual.space().count(src_type(kind));
        const std::int64_t d_count = factual.space().count(dst_type(kind));
        const double add_quota = cfg.alpha * quota;
        const double drop_quota = (1.0 - cfg.alpha) * quota;

        const std::int64_t non_edges = s_count * d_count - edge_count;
        if (std::ceil(add_quota) > static_cast<double>(non_edges)) {
            throw DataError(std::string("stochastic sampler: add quota ") +
                            std::to_string(add_quota) + " exceeds the " +
                            std::to_string(non_edges) + " non-edges of relation " +
                            relation_name(kind));
        }
        if (std::ceil(drop_quota) > static_cast<double>(edge_count)) {
            throw DataError(std::string("stochastic sampler: drop quota ") +
                            std::to_string(drop_quota) + " exceeds the " +
                            std::to_string(edge_count) + " edges of relation " +
                            relation_name(kind));
        }

        SelectionState state = make_state(factual, kind, quota, cfg.alpha);
        EdgeList& adds = delta.adds_for(kind);
        EdgeList& drops = delta.drops_for(kind);

        const std::int64_t attempt_cap =
            10000 + 1000 * static_cast<std::int64_t>(std::ceil(quota));
        std::int64_t attempts = 0;
        while (static_cast<double>(adds.size()) < add_quota) {
            if (++attempts > attempt_cap) {
                throw DataError(std::string("stochastic sampler stalled adding edges to ") +
                                relation_name(kind));
            }
            const Edge e{static_cast<NodeId>(rng.uniform_index(s_count)),
                         static_cast<NodeId>(rng.uniform_index(d_count))};
            if (factual.has_edge(kind, e) || state.chosen.contains(pair_key(e))) continue;
            state.chosen.insert(pair_key(e));
            adds.push_back(e);
        }
        attempts = 0;
        while (static_cast<double>(drops.size()) < drop_quota) {
            if (++attempts > attempt_cap) {
                throw DataError(std::string("stochastic sampler stalled dropping edges from ") +
                                relation_name(kind) +
                                " (last-edge protection may leave too few droppable edges)");
            }
            const Edge e = factual.edges(kind).pairs[rng.uniform_index(edge_count)];
            if (state.chosen.contains(pair_key(e))) continue;
            if (state.remaining_degree[0][e.src] <= 1 || state.remaining_degree[1][e.dst] <= 1) {
                continue;
            }
            state.chosen.insert(pair_key(e));
            state.remaining_degree[0][e.src]--;
            state.remaining_degree[1][e.dst]--;
            drops.push_back(e);
        }
    }

    for (int t = 0; t < 3; ++t) {
        canonicalize(delta.adds[t]);
        canonicalize(delta.drops[t]);
    }
    return CounterfactualView{delta, apply_delta(factual, delta), seed};
}

std::vector<CounterfactualView> generate_view_set(const TripartiteGraph& factual,
                                                  const PropagatedEmbeddings* selection_model,
                                                  const AugmentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.sampler == SamplerKind::Heuristic && selection_model == nullptr) {
        throw ConfigError("the heuristic sampler requires a pretrained selection model");
    }
    std::vector<CounterfactualView> views;
    views.reserve(cfg.num_views);
    for (int i = 0; i < cfg.num_views; ++i) {
        const std::uint64_t view_seed = derive_seed(seed, "view", static_cast<std::uint64_t>(i));
        if (cfg.sampler == SamplerKind::Heuristic) {
            views.push_back(heuristic_generate(factual, *selection_model, cfg, view_seed));
        } else {
            views.push_back(stochastic_generate(factual, cfg, view_seed));
        }
    }
    return views;
}

}  // namespace clbr
