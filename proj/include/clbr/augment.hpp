#pragma once

// Counterfactual view generation: perturb the factual graph by adding and
// dropping edges per relation. The stochastic sampler draws uniformly; the
// heuristic sampler scores candidate pairs with a pretrained selection
// model and filters them against batch-relative thresholds.

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "clbr/encoder.hpp"
#include "clbr/graph.hpp"

namespace clbr {

enum class SamplerKind : int { Stochastic = 0, Heuristic = 1 };

const char* sampler_name(SamplerKind kind);
SamplerKind parse_sampler(const std::string& name);

struct AugmentConfig {
    double r_ub = 0.1;  // fraction of |E_t| to perturb, per relation
    double r_ui = 0.1;
    double r_bi = 0.1;
    double alpha = 0.5;        // add/drop split
    double alpha_plus = 0.8;   // ratio for the add threshold kappa+
    double alpha_minus = 1.2;  // ratio for the drop threshold kappa-
    int num_views = 4;
    int batch_size = 2048;      // candidate pairs per sampling batch
    int max_batches = 100000;   // non-termination guard per relation
    SamplerKind sampler = SamplerKind::Heuristic;

    double ratio(RelationKind kind) const;
    void validate() const;
};

// Thresholds of one candidate batch: kappa+ = alpha_plus * max score,
// kappa- = alpha_minus * min score.
struct BatchThresholds {
    double kappa_plus = 0.0;
    double kappa_minus = 0.0;
};

BatchThresholds batch_thresholds(const std::vector<double>& scores, const AugmentConfig& cfg);

struct CounterfactualView {
    ViewDelta delta;
    TripartiteGraph graph;  // apply_delta(factual, delta)
    std::uint64_t seed = 0;
};

// Inner products of the two endpoint embeddings from the selection model;
// all pairs must belong to `kind`.
std::vector<double> relevance_scores(RelationKind kind, const EdgeList& pairs,
                                     const PropagatedEmbeddings& model);

// Applies the selection rule of one scored batch to a partial delta:
// add when score > kappa+ and the pair is a non-edge; drop when
// score <= kappa- and the pair is an edge; otherwise no selection.
// Caps, already-selected pairs and last-edge protection are honored when
// the optional state arguments are provided (heuristic generation path).
struct SelectionState {
    std::unordered_set<std::uint64_t> chosen;          // pairs already in E+ or E-
    std::array<std::vector<int>, 2> remaining_degree;  // src side, dst side, post-drop
    std::int64_t add_cap = -1;                         // -1 = uncapped
    std::int64_t drop_cap = -1;
};

void select_pairs(RelationKind kind, const EdgeList& batch, const std::vector<double>& scores,
                  const BatchThresholds& thresholds, const TripartiteGraph& graph,
                  ViewDelta& delta, SelectionState* state);

CounterfactualView heuristic_generate(const TripartiteGraph& factual,
                                      const PropagatedEmbeddings& selection_model,
                                      const AugmentConfig& cfg, std::uint64_t seed);

CounterfactualView stochastic_generate(const TripartiteGraph& factual, const AugmentConfig& cfg,
                                       std::uint64_t seed);

// N_v views, each from an independent seed derived from `seed`.
// `selection_model` may be null for the stochastic sampler.
std::vector<CounterfactualView> generate_view_set(const TripartiteGraph& factual,
                                                  const PropagatedEmbeddings* selection_model,
                                                  const AugmentConfig& cfg, std::uint64_t seed);

}  // namespace clbr
