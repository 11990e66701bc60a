#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gck {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Mutable undirected, unweighted graph. Neighbor lists are kept sorted and
// duplicate-free, so adjacency behaves as an ordered set per node.
//
// Invariants: symmetric adjacency, no self-loops, no parallel edges, dead nodes
// have no neighbors.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t num_nodes);

    // Symmetrizes and deduplicates; self-loops are dropped. Throws IndexError
    // for an endpoint outside [0, num_nodes).
    static Graph from_edges(std::span<const Edge> edges, std::size_t num_nodes);

    std::size_t num_nodes() const { return adjacency_.size(); }
    std::size_t alive_count() const { return alive_count_; }
    std::size_t num_edges() const { return num_edges_; }

    bool alive(NodeId v) const { return alive_[v] != 0; }
    std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
    std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
    bool has_edge(NodeId u, NodeId v) const;

    // Adds u-v if absent. Self-loops are ignored. Both endpoints must be alive.
    void add_edge(NodeId u, NodeId v);

    // Contracts `from` into `into`: every neighbor of `from` other than `into`
    // becomes a neighbor of `into`, then `from` dies. Throws ContractError if
    // either node is dead or they are equal.
    void merge_node(NodeId from, NodeId into);

    // Kills a node that has no alive neighbors. Throws ContractError otherwise.
    void remove_isolated(NodeId v);

    // Each edge once, as (u, v) with u < v, in ascending order.
    std::vector<Edge> edges() const;

    // Alive node ids in ascending order.
    std::vector<NodeId> alive_nodes() const;

    // Number of connected components among alive nodes.
    std::size_t component_count() const;

    // Checks every structural invariant; used by tests.
    bool check_invariants() const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    void require_alive(NodeId v, const char* op) const;

    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<std::uint8_t> alive_;
    std::size_t alive_count_ = 0;
    std::size_t num_edges_ = 0;
};

// Induced subgraph over the alive nodes with ids compacted in ascending order.
// `original_id[i]` is the id node i had in the source graph.
struct CompactGraph {
    Graph graph;
    std::vector<NodeId> original_id;
};

// Induced subgraph over `keep` (any order, no duplicates). Node i of the result
// corresponds to keep[i].
Graph induced_subgraph(const Graph& g, std::span<const NodeId> keep);

CompactGraph compact(const Graph& g);

// Read-only compressed-sparse-row snapshot of the alive part of a graph, with
// compacted ids. Safe to share between parallel readers.
struct CsrGraph {
    std::vector<std::size_t> offsets;  // size n + 1
    std::vector<NodeId> targets;       // size 2|E|
    std::vector<NodeId> original_id;   // compact id -> id in the source graph

    std::size_t num_nodes() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t num_edges() const { return targets.size() / 2; }
    std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
    std::span<const NodeId> neighbors(std::size_t v) const {
        return {targets.data() + offsets[v], degree(v)};
    }
};

CsrGraph freeze(const Graph& g);

// original-node-id -> surviving-node-id; identity for survivors. Nodes that
// were dropped without a merge target map to kRemoved.
class MergeMap {
public:
    static constexpr NodeId kRemoved = ~NodeId{0};

    MergeMap() = default;
    explicit MergeMap(std::size_t num_nodes);

    std::size_t size() const { return survivor_of_.size(); }
    void record(NodeId removed, NodeId target) { survivor_of_[removed] = target; }
    // Follows chains until a fixed point (or kRemoved) and rewrites entries
    // along the way.
    NodeId resolve(NodeId v);
    void compress();
    NodeId operator[](NodeId v) const { return survivor_of_[v]; }
    std::span<const NodeId> survivor_of() const { return survivor_of_; }

    friend bool operator==(const MergeMap&, const MergeMap&) = default;

private:
    std::vector<NodeId> survivor_of_;
};

// Edge-list text: one "u v" pair per line, '#' starts a comment. Node count is
// taken from a "# nodes=N ..." header when present, else max id + 1.
struct EdgeList {
    std::vector<Edge> edges;
    std::size_t num_nodes = 0;
};

EdgeList read_edge_list(std::istream& in, const std::string& source_name = "<stream>");
EdgeList read_edge_list_file(const std::string& path);

// Writes "# nodes=N edges=M" then one "u v" line per edge (u < v).
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list_file(const std::string& path, const Graph& g);

}  // namespace gck
