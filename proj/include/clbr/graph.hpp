#pragma once

// Unified user-bundle-item relation graph: three node types, three typed
// edge relations (user-bundle, user-item, bundle-item), with degree
// bookkeeping and the symmetric-normalized propagation operator.

#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace clbr {

using NodeId = std::int32_t;

enum class NodeType : int { User = 0, Item = 1, Bundle = 2 };

enum class RelationKind : int { UB = 0, UI = 1, BI = 2 };

inline constexpr std::array<RelationKind, 3> kAllRelations = {RelationKind::UB, RelationKind::UI,
                                                              RelationKind::BI};

NodeType src_type(RelationKind kind);
NodeType dst_type(RelationKind kind);
const char* relation_name(RelationKind kind);  // "ub" / "ui" / "bi"
RelationKind parse_relation(const std::string& name);
const char* node_type_name(NodeType type);  // "user" / "item" / "bundle"
NodeType parse_node_type(const std::string& name);

// Node counts. Global indexing concatenates users, items, bundles:
// users [0,N), items [N,N+L), bundles [N+L,N+L+K).
struct NodeSpace {
    NodeId num_users = 0;
    NodeId num_items = 0;
    NodeId num_bundles = 0;

    NodeId count(NodeType type) const;
    std::int64_t total() const {
        return static_cast<std::int64_t>(num_users) + num_items + num_bundles;
    }
    NodeId global_user(NodeId u) const { return u; }
    NodeId global_item(NodeId i) const { return num_users + i; }
    NodeId global_bundle(NodeId b) const { return num_users + num_items + b; }
    NodeId global_id(NodeType type, NodeId local) const;

    void validate() const;  // throws ConfigError when any count < 1

    bool operator==(const NodeSpace&) const = default;
};

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    auto operator<=>(const Edge&) const = default;
};

using EdgeList = std::vector<Edge>;

// Deduplicated edges of one relation in canonical (lexicographic) order.
struct EdgeSet {
    RelationKind kind = RelationKind::UB;
    EdgeList pairs;  // sorted, unique

    bool contains(Edge e) const;
    std::int64_t size() const { return static_cast<std::int64_t>(pairs.size()); }
};

// Per-relation edge add/drop sets. Adds must be absent from the factual
// graph, drops present; the two sets are disjoint by construction.
struct ViewDelta {
    std::array<EdgeList, 3> adds;   // indexed by RelationKind
    std::array<EdgeList, 3> drops;

    bool empty() const;
    EdgeList& adds_for(RelationKind kind) { return adds[static_cast<int>(kind)]; }
    EdgeList& drops_for(RelationKind kind) { return drops[static_cast<int>(kind)]; }
    const EdgeList& adds_for(RelationKind kind) const { return adds[static_cast<int>(kind)]; }
    const EdgeList& drops_for(RelationKind kind) const { return drops[static_cast<int>(kind)]; }
};

// Immutable after construction; safe to share across concurrent readers.
// Default-constructed graphs are empty placeholders; build_graph is the
// only way to obtain a populated one.
class TripartiteGraph {
  public:
    TripartiteGraph() = default;

    const NodeSpace& space() const { return space_; }
    const EdgeSet& edges(RelationKind kind) const { return edges_[static_cast<int>(kind)]; }
    bool has_edge(RelationKind kind, Edge e) const { return edges(kind).contains(e); }

    // Degree of a node within one relation, counted on whichever side the
    // node's type occupies. Asking for a type that does not participate in
    // the relation is a DataError.
    int degree(RelationKind kind, NodeType type, NodeId local) const;

    // Degree across all three relations, indexed by global node id.
    int total_degree(NodeId global) const;
    const std::vector<int>& total_degrees() const { return total_degree_; }

    friend TripartiteGraph build_graph(const NodeSpace& space, const EdgeList& ub,
                                       const EdgeList& ui, const EdgeList& bi);

  private:
    NodeSpace space_;
    std::array<EdgeSet, 3> edges_;
    std::array<std::vector<int>, 3> src_degree_;  // per relation, indexed by src local id
    std::array<std::vector<int>, 3> dst_degree_;  // per relation, indexed by dst local id
    std::vector<int> total_degree_;               // indexed by global id
};

// Duplicate input pairs are deduplicated silently (raw interaction logs
// contain repeats); out-of-bounds ids raise a DataError naming the pair
// and relation.
TripartiteGraph build_graph(const NodeSpace& space, const EdgeList& ub, const EdgeList& ui,
                            const EdgeList& bi);

// New graph with the delta applied; the input graph is untouched.
// Adding an existing edge or dropping a missing one is a DataError
// (it signals a sampler bug).
TripartiteGraph apply_delta(const TripartiteGraph& graph, const ViewDelta& delta);

ViewDelta inverse_delta(const ViewDelta& delta);

// Symmetric-normalized adjacency over global node indices: entry (i,j) is
// 1/sqrt(d_i * d_j) for every edge, with d the total degree across all
// relations. Zero diagonal; isolated nodes yield empty rows.
struct PropagationMatrix {
    Eigen::SparseMatrix<double, Eigen::RowMajor> weights;

    std::int64_t num_nodes() const { return weights.rows(); }
    std::int64_t num_nonzeros() const { return weights.nonZeros(); }
};

PropagationMatrix normalized_adjacency(const TripartiteGraph& graph);

}  // namespace clbr
