#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gck/attributes.hpp"
#include "gck/centrality.hpp"
#include "gck/cluster.hpp"
#include "gck/graph.hpp"

namespace gck {

struct CollapseParams {
    std::size_t psi = 0;  // surviving training nodes
    std::size_t eta = 100;
    double gamma = 0.5;
    Measure zeta = Measure::Eigenvector;
    CentralityParams centrality;
    std::uint64_t seed = 0;
    std::size_t kmeans_max_iter = 300;
    double kmeans_tol = 1e-6;
};

struct CollapseResult {
    Graph graph;                       // survivors only, ids compacted
    AttributeSet attrs;                // survivor rows, bitwise copies of the input rows
    std::vector<NodeId> survivors;     // compact id -> input id, ascending
    MergeMap merge_map;                // over input ids, path-compressed
    std::size_t survivor_count = 0;
    std::vector<std::size_t> cluster_of;          // per input node
    std::vector<std::size_t> cluster_sizes;
    std::vector<std::size_t> per_cluster_budget;
    std::vector<std::size_t> per_cluster_removed;
    CentralityScores centrality;
};

// Among candidates, the one with the smallest (phi, id). Throws EmptyInputError
// on an empty set.
NodeId tie_break_lowest(std::span<const NodeId> candidates, std::span<const double> phi);
// Among candidates, the one with the largest phi, lower id on equal phi.
NodeId tie_break_highest(std::span<const NodeId> candidates, std::span<const double> phi);

// Centrality-driven contraction with per-cluster quotas. For every cluster in
// ascending index order, members are visited by ascending phi and each is
// merged into its highest-phi alive neighbor (which may sit in another
// cluster) until the cluster has budget[i] alive members. A member without
// alive neighbors is removed outright. `phi` and `cluster_of` are indexed by
// node id; `graph` is modified in place.
struct ContractionLog {
    MergeMap merge_map;
    std::vector<std::size_t> per_cluster_removed;
};
ContractionLog contract_by_centrality(Graph& graph, std::span<const double> phi,
                                      std::span<const std::size_t> cluster_of,
                                      std::span<const std::size_t> budget);

// Scale-normalizes features and labels, weights them by gamma, and runs
// k-means with min(eta, rows) clusters.
ClusterAssignment feature_label_clusters(const AttributeSet& attrs, const CollapseParams& params);

// Contraction step given precomputed centrality and clusters; budgets are
// distributed proportionally to cluster sizes.
CollapseResult collapse_with(const Graph& g, const AttributeSet& attrs, CentralityScores centrality,
                             const ClusterAssignment& clusters, std::size_t psi);

// Full feature-label constrained collapse: centrality, scale normalization,
// clustering on the weighted feature-label matrix, proportional budgets,
// contraction. `g` must have no dead nodes and match `attrs` in size.
CollapseResult falcon_collapse(const Graph& g, const AttributeSet& attrs, const CollapseParams& params);

// Topology-only baseline: one global cluster.
CollapseResult agnostic_collapse(const Graph& g, const AttributeSet& attrs, std::size_t psi,
                                 Measure zeta, const CentralityParams& centrality = {});

}  // namespace gck
