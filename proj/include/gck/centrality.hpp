#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gck/graph.hpp"
#include "gck/parallel.hpp"

namespace gck {

enum class Measure { Degree, Betweenness, Closeness, PageRank, Eigenvector };

std::string_view to_string(Measure m);
// Accepts dc, bc, cc, pr, ec (case-insensitive).
Measure measure_from_string(std::string_view s);

struct CentralityParams {
    // Betweenness sources; nullopt means every node (exact).
    std::optional<std::size_t> sample_size;
    std::uint64_t seed = 0;
    double damping = 0.85;
    double tol = 1e-8;
    std::size_t max_iter = 1000;
    Deadline deadline;

    // Library defaults, with betweenness sampling capped at 512 sources.
    static CentralityParams defaults_for(std::size_t num_nodes);
};

// One score per alive node; node_ids[i] is the graph id scored by values[i],
// ascending.
struct CentralityScores {
    Measure measure = Measure::Degree;
    CentralityParams params;
    std::vector<NodeId> node_ids;
    std::vector<double> values;
    bool converged = true;
    std::size_t iterations = 0;
    bool shifted = false;  // eigenvector: iterated on A + I

    // Dense per-graph-id vector; dead ids get 0.
    std::vector<double> by_node_id(std::size_t num_nodes) const;
};

CentralityScores degree_centrality(const CsrGraph& g);

// Brandes accumulation. Each unordered pair is counted once. A sampled run is
// rescaled by n / sample_size. Throws ParameterError for sample_size 0 or
// larger than the node count.
CentralityScores betweenness_centrality(const CsrGraph& g, const CentralityParams& params = {});

// Component-scaled closeness: ((r-1)/(n-1)) * ((r-1)/sum of distances), where
// r is the size of the node's component. Isolated nodes score 0.
CentralityScores closeness_centrality(const CsrGraph& g, const CentralityParams& params = {});

// Power iteration of p <- (1-a)/n + a * A D^-1 p; degree-0 nodes spread their
// mass uniformly. Output sums to 1. Non-convergence sets converged = false.
CentralityScores pagerank_centrality(const CsrGraph& g, const CentralityParams& params = {});

// Dominant eigenvector of A, L2-normalized and non-negative. Graphs with a
// bipartite component are iterated on A + I (flagged by `shifted`). Throws
// DegenerateInputError on an edgeless graph.
CentralityScores eigenvector_centrality(const CsrGraph& g, const CentralityParams& params = {});

CentralityScores compute_centrality(const CsrGraph& g, Measure m, const CentralityParams& params);
CentralityScores compute_centrality(const Graph& g, Measure m, const CentralityParams& params);

// "# measure=... key=value ..." followed by "node_id,score" rows.
void write_scores_csv(std::ostream& out, const CentralityScores& scores);

}  // namespace gck
