#include "gck/collapse.hpp"

#include <algorithm>

#include "gck/error.hpp"
#include "gck/log.hpp"

namespace gck {

namespace {

bool lower_rank(NodeId a, NodeId b, std::span<const double> phi) {
    return phi[a] < phi[b] || (phi[a] == phi[b] && a < b);
}

}  // namespace

NodeId tie_break_lowest(std::span<const NodeId> candidates, std::span<const double> phi) {
    if (candidates.empty()) throw EmptyInputError("tie_break: no candidates");
    NodeId best = candidates.front();
    for (NodeId v : candidates.subspan(1)) {
        if (lower_rank(v, best, phi)) best = v;
    }
    return best;
}

NodeId tie_break_highest(std::span<const NodeId> candidates, std::span<const double> phi) {
    if (candidates.empty()) throw EmptyInputError("tie_break: no candidates");
    NodeId best = candidates.front();
    for (NodeId v : candidates.subspan(1)) {
        if (phi[v] > phi[best] || (phi[v] == phi[best] && v < best)) best = v;
    }
    return best;
}

ContractionLog contract_by_centrality(Graph& graph, std::span<const double> phi,
                                      std::span<const std::size_t> cluster_of,
                                      std::span<const std::size_t> budget) {
    const auto n = graph.num_nodes();
    if (phi.size() != n || cluster_of.size() != n) {
        throw ShapeError("contraction: centrality and cluster vectors must cover all " +
                         std::to_string(n) + " nodes");
    }
    std::vector<std::vector<NodeId>> members(budget.size());
    for (NodeId v = 0; v < n; ++v) {
        if (!graph.alive(v)) continue;
        if (cluster_of[v] >= budget.size()) {
            throw IndexError("node " + std::to_string(v) + " has cluster " +
                             std::to_string(cluster_of[v]) + " without a budget");
        }
        members[cluster_of[v]].push_back(v);
    }

    ContractionLog log{MergeMap(n), std::vector<std::size_t>(budget.size(), 0)};
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& order = members[c];
        std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return lower_rank(a, b, phi); });
        std::size_t remaining = order.size();
        for (auto it = order.begin(); remaining > budget[c] && it != order.end(); ++it) {
            const NodeId weakest = *it;
            if (!graph.alive(weakest)) continue;
            auto nbrs = graph.neighbors(weakest);
            if (nbrs.empty()) {
                graph.remove_isolated(weakest);
                log.merge_map.record(weakest, MergeMap::kRemoved);
            } else {
                const NodeId hub = tie_break_highest(nbrs, phi);
                graph.merge_node(weakest, hub);
                log.merge_map.record(weakest, hub);
            }
            --remaining;
            ++log.per_cluster_removed[c];
        }
    }
    log.merge_map.compress();
    return log;
}

namespace {

void check_inputs(const Graph& g, const AttributeSet& attrs, std::size_t psi) {
    const auto n = g.num_nodes();
    if (attrs.num_nodes() != n) {
        throw ShapeError("graph has " + std::to_string(n) + " nodes but attributes have " +
                         std::to_string(attrs.num_nodes()));
    }
    if (g.alive_count() != n) throw ContractError("collapse expects a graph without dead nodes");
    if (psi == 0) throw ParameterError("node budget psi must be positive");
    if (psi > n) {
        throw ParameterError("node budget psi " + std::to_string(psi) + " exceeds " + std::to_string(n) +
                             " training nodes");
    }
}

}  // namespace

ClusterAssignment feature_label_clusters(const AttributeSet& attrs, const CollapseParams& params) {
    const auto n = attrs.num_nodes();
    if (n == 0) throw EmptyInputError("no nodes to cluster");
    const std::size_t eta = std::min(params.eta, n);
    if (eta < params.eta) spdlog::info("clustering: eta {} capped at {} nodes", params.eta, n);
    const Matrix m = build_m(scale_normalize(attrs.features), scale_normalize(attrs.labels), params.gamma);
    return kmeans(m, {eta, params.seed, params.kmeans_max_iter, params.kmeans_tol});
}

CollapseResult collapse_with(const Graph& g, const AttributeSet& attrs, CentralityScores centrality,
                             const ClusterAssignment& clusters, std::size_t psi) {
    check_inputs(g, attrs, psi);
    const auto n = g.num_nodes();
    if (clusters.cluster_of.size() != n) {
        throw ShapeError("cluster assignment covers " + std::to_string(clusters.cluster_of.size()) +
                         " nodes, graph has " + std::to_string(n));
    }
    CollapseResult result;
    result.centrality = std::move(centrality);
    const auto phi = result.centrality.by_node_id(n);
    result.cluster_of = clusters.cluster_of;
    result.cluster_sizes = clusters.sizes();
    result.per_cluster_budget = distribute_budget(result.cluster_sizes, psi);

    Graph work = g;
    auto log = contract_by_centrality(work, phi, result.cluster_of, result.per_cluster_budget);
    result.per_cluster_removed = std::move(log.per_cluster_removed);
    result.merge_map = std::move(log.merge_map);
    result.survivors = work.alive_nodes();
    result.survivor_count = result.survivors.size();
    result.graph = induced_subgraph(work, result.survivors);
    result.attrs = attrs.select(result.survivors);
    spdlog::debug("collapse: {} -> {} nodes, {} -> {} edges", n, result.survivor_count, g.num_edges(),
                  result.graph.num_edges());
    return result;
}

CollapseResult falcon_collapse(const Graph& g, const AttributeSet& attrs, const CollapseParams& params) {
    check_inputs(g, attrs, params.psi);
    auto centrality = compute_centrality(freeze(g), params.zeta, params.centrality);
    const auto clusters = feature_label_clusters(attrs, params);
    return collapse_with(g, attrs, std::move(centrality), clusters, params.psi);
}

CollapseResult agnostic_collapse(const Graph& g, const AttributeSet& attrs, std::size_t psi,
                                 Measure zeta, const CentralityParams& centrality) {
    CollapseParams p;
    p.psi = psi;
    p.eta = 1;
    p.zeta = zeta;
    p.centrality = centrality;
    return falcon_collapse(g, attrs, p);
}

}  // namespace gck
