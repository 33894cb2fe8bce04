#include "clbr/graph.hpp"

#include <algorithm>
#include <cmath>

#include "clbr/errors.hpp"

namespace clbr {

namespace {

std::string edge_str(RelationKind kind, Edge e) {
    return std::string(relation_name(kind)) + " (" + std::to_string(e.src) + ", " +
           std::to_string(e.dst) + ")";
}

}  // namespace

NodeType src_type(RelationKind kind) {
    switch (kind) {
        case RelationKind::UB: return NodeType::User;
        case RelationKind::UI: return NodeType::User;
        case RelationKind::BI: return NodeType::Bundle;
    }
    throw DataError("invalid relation kind");
}

NodeType dst_type(RelationKind kind) {
    switch (kind) {
        case RelationKind::UB: return NodeType::Bundle;
        case RelationKind::UI: return NodeType::Item;
        case RelationKind::BI: return NodeType::Item;
    }
    throw DataError("invalid relation kind");
}

const char* relation_name(RelationKind kind) {
    switch (kind) {
        case RelationKind::UB: return "ub";
        case RelationKind::UI: return "ui";
        case RelationKind::BI: return "bi";
    }
    return "?";
}

RelationKind parse_relation(const std::string& name) {
    if (name == "ub") return RelationKind::UB;
    if (name == "ui") return RelationKind::UI;
    if (name == "bi") return RelationKind::BI;
    throw DataError("unknown relation '" + name + "' (expected ub, ui or bi)");
}

const char* node_type_name(NodeType type) {
    switch (type) {
        case NodeType::User: return "user";
        case NodeType::Item: return "item";
        case NodeType::Bundle: return "bundle";
    }
    return "?";
}

NodeType parse_node_type(const std::string& name) {
    if (name == "user") return NodeType::User;
    if (name == "item") return NodeType::Item;
    if (name == "bundle") return NodeType::Bundle;
    throw DataError("unknown node type '" + name + "' (expected user, item or bundle)");
}

NodeId NodeSpace::count(NodeType type) const {
    switch (type) {
        case NodeType::User: return num_users;
        case NodeType::Item: return num_items;
        case NodeType::Bundle: return num_bundles;
    }
    return 0;
}

NodeId NodeSpace::global_id(NodeType type, NodeId local) const {
    switch (type) {
        case NodeType::User: return global_user(local);
        case NodeType::Item: return global_item(local);
        case NodeType::Bundle: return global_bundle(local);
    }
    return -1;
}

void NodeSpace::validate() const {
    if (num_users < 1 || num_items < 1 || num_bundles < 1) {
        throw ConfigError("node space requires at least one node of each type, got users=" +
                          std::to_string(num_users) + " items=" + std::to_string(num_items) +
                          " bundles=" + std::to_string(num_bundles));
    }
}

bool EdgeSet::contains(Edge e) const {
    return std::binary_search(pairs.begin(), pairs.end(), e);
}

bool ViewDelta::empty() const {
    for (int t = 0; t < 3; ++t) {
        if (!adds[t].empty() || !drops[t].empty()) return false;
    }
    return true;
}

int TripartiteGraph::degree(RelationKind kind, NodeType type, NodeId local) const {
    const int t = static_cast<int>(kind);
    if (type == src_type(kind)) {
        if (local < 0 || local >= static_cast<NodeId>(src_degree_[t].size())) {
            throw DataError("degree query out of bounds for " + std::string(relation_name(kind)));
        }
        return src_degree_[t][local];
    }
    if (type == dst_type(kind)) {
        if (local < 0 || local >= static_cast<NodeId>(dst_degree_[t].size())) {
            throw DataError("degree query out of bounds for " + std::string(relation_name(kind)));
        }
        return dst_degree_[t][local];
    }
    throw DataError(std::string(node_type_name(type)) + " nodes do not participate in relation " +
                    relation_name(kind));
}

int TripartiteGraph::total_degree(NodeId global) const {
    if (global < 0 || global >= static_cast<NodeId>(total_degree_.size())) {
        throw DataError("total_degree: global id " + std::to_string(global) + " out of bounds");
    }
    return total_degree_[global];
}

TripartiteGraph build_graph(const NodeSpace& space, const EdgeList& ub, const EdgeList& ui,
                            const EdgeList& bi) {
    space.validate();

    TripartiteGraph g;
    g.space_ = space;
    g.total_degree_.assign(static_cast<std::size_t>(space.total()), 0);

    const std::array<const EdgeList*, 3> inputs = {&ub, &ui, &bi};
    for (RelationKind kind : kAllRelations) {
        const int t = static_cast<int>(kind);
        const NodeId src_bound = space.count(src_type(kind));
        const NodeId dst_bound = space.count(dst_type(kind));

        EdgeList pairs = *inputs[t];
        for (Edge e : pairs) {
            if (e.src < 0 || e.src >= src_bound || e.dst < 0 || e.dst >= dst_bound) {
                throw DataError("edge out of bounds in relation " + edge_str(kind, e) +
                                ": valid ranges src [0," + std::to_string(src_bound) +
                                ") dst [0," + std::to_string(dst_bound) + ")");
            }
        }
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

        g.edges_[t] = EdgeSet{kind, std::move(pairs)};
        g.src_degree_[t].assign(static_cast<std::size_t>(src_bound), 0);
        g.dst_degree_[t].assign(static_cast<std::size_t>(dst_bound), 0);
        for (Edge e : g.edges_[t].pairs) {
            g.src_degree_[t][e.src]++;
            g.dst_degree_[t][e.dst]++;
            g.total_degree_[space.global_id(src_type(kind), e.src)]++;
            g.total_degree_[space.global_id(dst_type(kind), e.dst)]++;
        }
    }
    return g;
}

TripartiteGraph apply_delta(const TripartiteGraph& graph, const ViewDelta& delta) {
    std::array<EdgeList, 3> merged;
    for (RelationKind kind : kAllRelations) {
        const int t = static_cast<int>(kind);
        for (Edge e : delta.adds[t]) {
            if (graph.has_edge(kind, e)) {
                throw DataError("delta adds an edge already present: " + edge_str(kind, e));
            }
        }
        EdgeList drops = delta.drops[t];
        std::sort(drops.begin(), drops.end());
        for (Edge e : drops) {
            if (!graph.has_edge(kind, e)) {
                throw DataError("delta drops a missing edge: " + edge_str(kind, e));
            }
        }
        EdgeList out;
        out.reserve(graph.edges(kind).pairs.size() + delta.adds[t].size());
        std::set_difference(graph.edges(kind).pairs.begin(), graph.edges(kind).pairs.end(),
                            drops.begin(), drops.end(), std::back_inserter(out));
        out.insert(out.end(), delta.adds[t].begin(), delta.adds[t].end());
        merged[t] = std::move(out);
    }
    return build_graph(graph.space(), merged[0], merged[1], merged[2]);
}

ViewDelta inverse_delta(const ViewDelta& delta) {
    ViewDelta inv;
    inv.adds = delta.drops;
    inv.drops = delta.adds;
    return inv;
}

PropagationMatrix normalized_adjacency(const TripartiteGraph& graph) {
    const NodeSpace& space = graph.space();
    const auto n = space.total();

    std::vector<Eigen::Triplet<double>> triplets;
    for (RelationKind kind : kAllRelations) {
        triplets.reserve(triplets.size() + 2 * graph.edges(kind).pairs.size());
        for (Edge e : graph.edges(kind).pairs) {
            const NodeId i = space.global_id(src_type(kind), e.src);
            const NodeId j = space.global_id(dst_type(kind), e.dst);
            const double w =
                1.0 / std::sqrt(static_cast<double>(graph.total_degree(i)) * graph.total_degree(j));
            triplets.emplace_back(i, j, w);
            triplets.emplace_back(j, i, w);
        }
    }

    PropagationMatrix op;
    op.weights.resize(n, n);
    op.weights.setFromTriplets(triplets.begin(), triplets.end());
    op.weights.makeCompressed();
    return op;
}

}  // namespace clbr
