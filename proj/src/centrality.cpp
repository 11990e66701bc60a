#include "gck/centrality.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "gck/error.hpp"
#include "gck/log.hpp"

namespace gck {

namespace {

// Betweenness partial sums are reduced over a fixed number of source chunks,
// so the result does not depend on the worker count.
constexpr std::size_t kSourceChunks = 64;

struct BrandesWorkspace {
    explicit BrandesWorkspace(std::size_t n) : sigma(n), dist(n), delta(n) { order.reserve(n); }
    std::vector<double> sigma;
    std::vector<std::int64_t> dist;
    std::vector<double> delta;
    std::vector<NodeId> order;
};

// Adds the dependency of source s on every other node to `acc`.
void accumulate_source(const CsrGraph& g, NodeId s, BrandesWorkspace& ws, std::span<double> acc) {
    std::fill(ws.sigma.begin(), ws.sigma.end(), 0.0);
    std::fill(ws.dist.begin(), ws.dist.end(), -1);
    std::fill(ws.delta.begin(), ws.delta.end(), 0.0);
    ws.order.clear();

    ws.sigma[s] = 1.0;
    ws.dist[s] = 0;
    ws.order.push_back(s);
    for (std::size_t head = 0; head < ws.order.size(); ++head) {
        NodeId v = ws.order[head];
        for (NodeId w : g.neighbors(v)) {
            if (ws.dist[w] < 0) {
                ws.dist[w] = ws.dist[v] + 1;
                ws.order.push_back(w);
            }
            if (ws.dist[w] == ws.dist[v] + 1) ws.sigma[w] += ws.sigma[v];
        }
    }
    for (std::size_t i = ws.order.size(); i-- > 0;) {
        NodeId v = ws.order[i];
        double d = 0.0;
        for (NodeId w : g.neighbors(v)) {
            if (ws.dist[w] == ws.dist[v] + 1) d += ws.sigma[v] / ws.sigma[w] * (1.0 + ws.delta[w]);
        }
        ws.delta[v] = d;
        if (v != s) acc[v] += d;
    }
}

struct BfsTotals {
    std::size_t reached = 0;  // including the source
    std::uint64_t distance_sum = 0;
};

BfsTotals bfs_totals(const CsrGraph& g, NodeId s, std::vector<std::int64_t>& dist,
                     std::vector<NodeId>& queue) {
    std::fill(dist.begin(), dist.end(), -1);
    queue.clear();
    dist[s] = 0;
    queue.push_back(s);
    BfsTotals t;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        NodeId v = queue[head];
        t.distance_sum += static_cast<std::uint64_t>(dist[v]);
        for (NodeId w : g.neighbors(v)) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    t.reached = queue.size();
    return t;
}

double closeness_from_totals(const BfsTotals& t, std::size_t n) {
    if (t.reached <= 1 || n <= 1) return 0.0;
    const double r1 = static_cast<double>(t.reached - 1);
    return (r1 / static_cast<double>(n - 1)) * (r1 / static_cast<double>(t.distance_sum));
}

bool has_bipartite_component_with_edges(const CsrGraph& g) {
    const auto n = g.num_nodes();
    std::vector<int> color(n, -1);
    std::vector<NodeId> queue;
    for (NodeId s = 0; s < n; ++s) {
        if (color[s] >= 0 || g.degree(s) == 0) continue;
        bool bipartite = true;
        color[s] = 0;
        queue.assign(1, s);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            NodeId v = queue[head];
            for (NodeId w : g.neighbors(v)) {
                if (color[w] < 0) {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if (color[w] == color[v]) {
                    bipartite = false;
                }
            }
        }
        if (bipartite) return true;
    }
    return false;
}

struct PowerResult {
    std::vector<double> x;
    bool converged = false;
    std::size_t iterations = 0;
};

PowerResult eigenvector_power(const CsrGraph& g, bool shifted, const CentralityParams& p) {
    const auto n = g.num_nodes();
    const auto sn = static_cast<std::int64_t>(n);
    PowerResult r;
    r.x.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> next(n);
    while (r.iterations < p.max_iter) {
        p.deadline.check("eigenvector centrality");
        const auto& x = r.x;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < sn; ++i) {
            const auto v = static_cast<std::size_t>(i);
            double s = shifted ? x[v] : 0.0;
            for (NodeId w : g.neighbors(v)) s += x[w];
            next[v] = s;
        }
        double norm = 0.0;
        for (double y : next) norm += y * y;
        norm = std::sqrt(norm);
        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            next[v] /= norm;
            const double d = next[v] - r.x[v];
            change += d * d;
        }
        std::swap(r.x, next);
        ++r.iterations;
        if (std::sqrt(change) < p.tol) {
            r.converged = true;
            break;
        }
    }
    return r;
}

CentralityScores make_scores(const CsrGraph& g, Measure m, const CentralityParams& p) {
    CentralityScores s;
    s.measure = m;
    s.params = p;
    s.node_ids = g.original_id;
    s.values.assign(g.num_nodes(), 0.0);
    return s;
}

}  // namespace

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::Degree: return "dc";
        case Measure::Betweenness: return "bc";
        case Measure::Closeness: return "cc";
        case Measure::PageRank: return "pr";
        case Measure::Eigenvector: return "ec";
    }
    return "?";
}

Measure measure_from_string(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "dc" || lower == "degree") return Measure::Degree;
    if (lower == "bc" || lower == "betweenness") return Measure::Betweenness;
    if (lower == "cc" || lower == "closeness") return Measure::Closeness;
    if (lower == "pr" || lower == "pagerank") return Measure::PageRank;
    if (lower == "ec" || lower == "eigenvector") return Measure::Eigenvector;
    throw ParameterError("unknown centrality measure '" + std::string(s) + "'");
}

CentralityParams CentralityParams::defaults_for(std::size_t num_nodes) {
    CentralityParams p;
    if (num_nodes > 512) p.sample_size = 512;
    return p;
}

std::vector<double> CentralityScores::by_node_id(std::size_t num_nodes) const {
    std::vector<double> out(num_nodes, 0.0);
    for (std::size_t i = 0; i < node_ids.size(); ++i) out[node_ids[i]] = values[i];
    return out;
}

CentralityScores degree_centrality(const CsrGraph& g) {
    auto s = make_scores(g, Measure::Degree, {});
    for (std::size_t v = 0; v < g.num_nodes(); ++v) s.values[v] = static_cast<double>(g.degree(v));
    return s;
}

CentralityScores betweenness_centrality(const CsrGraph& g, const CentralityParams& params) {
    const auto n = g.num_nodes();
    auto s = make_scores(g, Measure::Betweenness, params);
    std::vector<NodeId> sources(n);
    std::iota(sources.begin(), sources.end(), NodeId{0});
    double scale = 0.5;  // each unordered pair is reached from both ends
    if (params.sample_size) {
        const auto k = *params.sample_size;
        if (k == 0) throw ParameterError("betweenness sample_size must be positive");
        if (k > n) {
            throw ParameterError("betweenness sample_size " + std::to_string(k) + " exceeds " +
                                 std::to_string(n) + " nodes");
        }
        if (k < n) {
            std::mt19937_64 rng(params.seed);
            std::shuffle(sources.begin(), sources.end(), rng);
            sources.resize(k);
            std::sort(sources.begin(), sources.end());
            scale *= static_cast<double>(n) / static_cast<double>(k);
        }
    }
    if (n == 0) return s;

    const std::size_t chunks = std::min(kSourceChunks, sources.size());
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(n, 0.0));
    std::atomic<bool> timed_out{false};
#pragma omp parallel
    {
        BrandesWorkspace ws(n);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
            const auto begin = static_cast<std::size_t>(c) * sources.size() / chunks;
            const auto end = (static_cast<std::size_t>(c) + 1) * sources.size() / chunks;
            for (std::size_t i = begin; i < end; ++i) {
                if (timed_out.load(std::memory_order_relaxed)) break;
                if (params.deadline.expired()) {
                    timed_out = true;
                    break;
                }
                accumulate_source(g, sources[i], ws, partial[static_cast<std::size_t>(c)]);
            }
        }
    }
    if (timed_out) throw TimeoutError("betweenness centrality exceeded its time budget");
    for (const auto& part : partial) {
        for (std::size_t v = 0; v < n; ++v) s.values[v] += part[v];
    }
    for (double& v : s.values) v *= scale;
    return s;
}

CentralityScores closeness_centrality(const CsrGraph& g, const CentralityParams& params) {
    const auto n = g.num_nodes();
    auto s = make_scores(g, Measure::Closeness, params);
    std::atomic<bool> timed_out{false};
#pragma omp parallel
    {
        std::vector<std::int64_t> dist(n);
        std::vector<NodeId> queue;
        queue.reserve(n);
#pragma omp for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            if (timed_out.load(std::memory_order_relaxed)) continue;
            if ((i & 63) == 0 && params.deadline.expired()) {
                timed_out = true;
                continue;
            }
            const auto v = static_cast<NodeId>(i);
            s.values[v] = closeness_from_totals(bfs_totals(g, v, dist, queue), n);
        }
    }
    if (timed_out) throw TimeoutError("closeness centrality exceeded its time budget");
    return s;
}

CentralityScores pagerank_centrality(const CsrGraph& g, const CentralityParams& params) {
    if (!(params.damping > 0.0 && params.damping < 1.0)) {
        throw ParameterError("pagerank damping must lie in (0, 1)");
    }
    const auto n = g.num_nodes();
    auto s = make_scores(g, Measure::PageRank, params);
    if (n == 0) return s;
    const double a = params.damping;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> p(n, inv_n);
    std::vector<double> share(n);
    std::vector<double> next(n);
    const auto sn = static_cast<std::int64_t>(n);
    s.converged = false;
    while (s.iterations < params.max_iter) {
        params.deadline.check("pagerank centrality");
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            const auto d = g.degree(v);
            if (d == 0) dangling += p[v];
            share[v] = d == 0 ? 0.0 : p[v] / static_cast<double>(d);
        }
        const double base = (1.0 - a) * inv_n + a * dangling * inv_n;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < sn; ++i) {
            const auto v = static_cast<std::size_t>(i);
            double sum = 0.0;
            for (NodeId w : g.neighbors(v)) sum += share[w];
            next[v] = base + a * sum;
        }
        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - p[v]);
        std::swap(p, next);
        ++s.iterations;
        if (change < params.tol) {
            s.converged = true;
            break;
        }
    }
    if (!s.converged) {
        spdlog::warn("pagerank did not converge within {} iterations", params.max_iter);
    }
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (std::size_t v = 0; v < n; ++v) s.values[v] = p[v] / total;
    return s;
}

CentralityScores eigenvector_centrality(const CsrGraph& g, const CentralityParams& params) {
    if (g.num_edges() == 0) {
        throw DegenerateInputError("eigenvector centrality needs at least one edge");
    }
    auto s = make_scores(g, Measure::Eigenvector, params);
    bool shifted = has_bipartite_component_with_edges(g);
    auto r = eigenvector_power(g, shifted, params);
    if (!r.converged && !shifted) {
        spdlog::info("eigenvector centrality: retrying with A + I after {} iterations", r.iterations);
        shifted = true;
        r = eigenvector_power(g, shifted, params);
    }
    if (!r.converged) {
        spdlog::warn("eigenvector centrality did not converge within {} iterations", params.max_iter);
    }
    s.values = std::move(r.x);
    s.converged = r.converged;
    s.iterations = r.iterations;
    s.shifted = shifted;
    return s;
}

CentralityScores compute_centrality(const CsrGraph& g, Measure m, const CentralityParams& params) {
    switch (m) {
        case Measure::Degree: {
            auto s = degree_centrality(g);
            s.params = params;
            return s;
        }
        case Measure::Betweenness: return betweenness_centrality(g, params);
        case Measure::Closeness: return closeness_centrality(g, params);
        case Measure::PageRank: return pagerank_centrality(g, params);
        case Measure::Eigenvector: return eigenvector_centrality(g, params);
    }
    throw ParameterError("unknown centrality measure");
}

CentralityScores compute_centrality(const Graph& g, Measure m, const CentralityParams& params) {
    return compute_centrality(freeze(g), m, params);
}

void write_scores_csv(std::ostream& out, const CentralityScores& scores) {
    const auto& p = scores.params;
    out << "# measure=" << to_string(scores.measure);
    switch (scores.measure) {
        case Measure::Betweenness:
            out << " sample_size="
                << (p.sample_size ? std::to_string(*p.sample_size) : std::string("all"))
                << " seed=" << p.seed;
            break;
        case Measure::PageRank:
            out << " damping=" << p.damping << " tol=" << p.tol << " max_iter=" << p.max_iter
                << " converged=" << (scores.converged ? "true" : "false");
            break;
        case Measure::Eigenvector:
            out << " tol=" << p.tol << " max_iter=" << p.max_iter
                << " shifted=" << (scores.shifted ? "true" : "false")
                << " converged=" << (scores.converged ? "true" : "false");
            break;
        default: break;
    }
    out << "\nnode_id,score\n";
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < scores.values.size(); ++i) {
        out << scores.node_ids[i] << ',' << scores.values[i] << '\n';
    }
    out.precision(old_precision);
}

}  // namespace gck
