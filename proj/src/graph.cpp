#include "gck/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "gck/error.hpp"
#include "gck/log.hpp"

namespace gck {

namespace {

// Sorted-vector set helpers.
bool insert_sorted(std::vector<NodeId>& set, NodeId v) {
    auto it = std::lower_bound(set.begin(), set.end(), v);
    if (it != set.end() && *it == v) return false;
    set.insert(it, v);
    return true;
}

bool erase_sorted(std::vector<NodeId>& set, NodeId v) {
    auto it = std::lower_bound(set.begin(), set.end(), v);
    if (it == set.end() || *it != v) return false;
    set.erase(it);
    return true;
}

}  // namespace

Graph::Graph(std::size_t num_nodes)
    : adjacency_(num_nodes), alive_(num_nodes, 1), alive_count_(num_nodes) {}

Graph Graph::from_edges(std::span<const Edge> edges, std::size_t num_nodes) {
    Graph g(num_nodes);
    std::size_t self_loops = 0;
    for (const auto& [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes) {
            throw IndexError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                             ") references a node outside [0, " + std::to_string(num_nodes) + ")");
        }
        if (u == v) {
            ++self_loops;
            continue;
        }
        g.adjacency_[u].push_back(v);
        g.adjacency_[v].push_back(u);
    }
    std::size_t degree_sum = 0;
    for (auto& nbrs : g.adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        degree_sum += nbrs.size();
    }
    g.num_edges_ = degree_sum / 2;
    if (self_loops > 0) spdlog::info("build_graph: dropped {} self-loop(s)", self_loops);
    return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    const auto& nbrs = adjacency_[u];
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

void Graph::require_alive(NodeId v, const char* op) const {
    if (v >= num_nodes()) {
        throw ContractError(std::string(op) + ": node " + std::to_string(v) + " out of range");
    }
    if (!alive(v)) {
        throw ContractError(std::string(op) + ": node " + std::to_string(v) + " is dead");
    }
}

void Graph::add_edge(NodeId u, NodeId v) {
    require_alive(u, "add_edge");
    require_alive(v, "add_edge");
    if (u == v) return;
    if (insert_sorted(adjacency_[u], v)) {
        insert_sorted(adjacency_[v], u);
        ++num_edges_;
    }
}

void Graph::merge_node(NodeId from, NodeId into) {
    require_alive(from, "merge_node");
    require_alive(into, "merge_node");
    if (from == into) {
        throw ContractError("merge_node: cannot merge node " + std::to_string(from) + " into itself");
    }
    std::vector<NodeId> moved = std::move(adjacency_[from]);
    adjacency_[from].clear();
    num_edges_ -= moved.size();
    for (NodeId w : moved) {
        erase_sorted(adjacency_[w], from);
        if (w == into) continue;
        if (insert_sorted(adjacency_[w], into)) {
            insert_sorted(adjacency_[into], w);
            ++num_edges_;
        }
    }
    alive_[from] = 0;
    --alive_count_;
}

void Graph::remove_isolated(NodeId v) {
    require_alive(v, "remove_isolated");
    if (!adjacency_[v].empty()) {
        throw ContractError("remove_isolated: node " + std::to_string(v) + " still has " +
                            std::to_string(adjacency_[v].size()) + " neighbor(s)");
    }
    alive_[v] = 0;
    --alive_count_;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < num_nodes(); ++u) {
        for (NodeId v : adjacency_[u]) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

std::vector<NodeId> Graph::alive_nodes() const {
    std::vector<NodeId> out;
    out.reserve(alive_count_);
    for (NodeId v = 0; v < num_nodes(); ++v) {
        if (alive(v)) out.push_back(v);
    }
    return out;
}

std::size_t Graph::component_count() const {
    std::vector<std::uint8_t> seen(num_nodes(), 0);
    std::vector<NodeId> stack;
    std::size_t components = 0;
    for (NodeId s = 0; s < num_nodes(); ++s) {
        if (!alive(s) || seen[s]) continue;
        ++components;
        seen[s] = 1;
        stack.push_back(s);
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (NodeId w : adjacency_[u]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
    }
    return components;
}

bool Graph::check_invariants() const {
    std::size_t alive_seen = 0;
    std::size_t degree_sum = 0;
    for (NodeId u = 0; u < num_nodes(); ++u) {
        const auto& nbrs = adjacency_[u];
        if (alive(u)) ++alive_seen;
        else if (!nbrs.empty()) return false;
        if (!std::is_sorted(nbrs.begin(), nbrs.end())) return false;
        if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end()) return false;
        for (NodeId v : nbrs) {
            if (v == u || v >= num_nodes() || !alive(v) || !has_edge(v, u)) return false;
        }
        degree_sum += nbrs.size();
    }
    return alive_seen == alive_count_ && degree_sum % 2 == 0 && degree_sum / 2 == num_edges_;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> keep) {
    constexpr NodeId kAbsent = ~NodeId{0};
    std::vector<NodeId> new_id(g.num_nodes(), kAbsent);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] >= g.num_nodes()) {
            throw IndexError("induced_subgraph: node " + std::to_string(keep[i]) + " out of range");
        }
        new_id[keep[i]] = static_cast<NodeId>(i);
    }
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        for (NodeId w : g.neighbors(keep[i])) {
            NodeId j = new_id[w];
            if (j != kAbsent && i < j) edges.emplace_back(static_cast<NodeId>(i), j);
        }
    }
    return Graph::from_edges(edges, keep.size());
}

CompactGraph compact(const Graph& g) {
    auto ids = g.alive_nodes();
    Graph sub = induced_subgraph(g, ids);
    return {std::move(sub), std::move(ids)};
}

CsrGraph freeze(const Graph& g) {
    CsrGraph csr;
    csr.original_id = g.alive_nodes();
    std::vector<NodeId> new_id(g.num_nodes(), 0);
    for (std::size_t i = 0; i < csr.original_id.size(); ++i) {
        new_id[csr.original_id[i]] = static_cast<NodeId>(i);
    }
    csr.offsets.assign(csr.original_id.size() + 1, 0);
    csr.targets.reserve(2 * g.num_edges());
    for (std::size_t i = 0; i < csr.original_id.size(); ++i) {
        for (NodeId w : g.neighbors(csr.original_id[i])) csr.targets.push_back(new_id[w]);
        csr.offsets[i + 1] = csr.targets.size();
    }
    return csr;
}

MergeMap::MergeMap(std::size_t num_nodes) : survivor_of_(num_nodes) {
    std::iota(survivor_of_.begin(), survivor_of_.end(), NodeId{0});
}

NodeId MergeMap::resolve(NodeId v) {
    NodeId root = v;
    while (root != kRemoved && survivor_of_[root] != root) root = survivor_of_[root];
    while (v != kRemoved && v != root) {
        NodeId next = survivor_of_[v];
        survivor_of_[v] = root;
        v = next;
    }
    return root;
}

void MergeMap::compress() {
    for (NodeId v = 0; v < survivor_of_.size(); ++v) resolve(v);
}

EdgeList read_edge_list(std::istream& in, const std::string& source_name) {
    EdgeList out;
    std::optional<std::size_t> declared_nodes;
    std::size_t max_id_plus_one = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            auto pos = line.find("nodes=", hash);
            if (pos != std::string::npos) {
                try {
                    declared_nodes = std::stoull(line.substr(pos + 6));
                } catch (const std::exception&) {
                    throw ParseError(source_name, line_no, "bad nodes= header");
                }
            }
            line.erase(hash);
        }
        std::istringstream fields(line);
        long long u = 0;
        long long v = 0;
        if (!(fields >> u)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ParseError(source_name, line_no, "expected two integer node ids");
        }
        std::string rest;
        if (!(fields >> v) || (fields >> rest)) {
            throw ParseError(source_name, line_no, "expected exactly two integer node ids");
        }
        if (u < 0 || v < 0 || u > 0xFFFFFFFELL || v > 0xFFFFFFFELL) {
            throw ParseError(source_name, line_no, "node id out of range");
        }
        out.edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        max_id_plus_one = std::max<std::size_t>(max_id_plus_one, std::max(u, v) + 1);
    }
    out.num_nodes = declared_nodes.value_or(max_id_plus_one);
    if (max_id_plus_one > out.num_nodes) {
        throw IndexError(source_name + ": node id " + std::to_string(max_id_plus_one - 1) +
                         " exceeds declared nodes=" + std::to_string(out.num_nodes));
    }
    return out;
}

EdgeList read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open edge list '" + path + "'");
    return read_edge_list(in, path);
}

void write_edge_list(std::ostream& out, const Graph& g) {
    out << "# nodes=" << g.num_nodes() << " edges=" << g.num_edges() << '\n';
    for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void write_edge_list_file(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write edge list '" + path + "'");
    write_edge_list(out, g);
}

}  // namespace gck
