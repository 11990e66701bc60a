#include "gck/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <stack>

#include "gck/cluster.hpp"
#include "gck/error.hpp"

namespace gck::serial {

std::vector<double> betweenness(const CsrGraph& g, std::span<const NodeId> sources) {
    const auto n = g.num_nodes();
    std::vector<double> bc(n, 0.0);
    for (NodeId s : sources) {
        std::vector<std::vector<NodeId>> pred(n);
        std::vector<double> sigma(n, 0.0);
        std::vector<long> dist(n, -1);
        std::stack<NodeId> visited;
        std::queue<NodeId> frontier;
        sigma[s] = 1.0;
        dist[s] = 0;
        frontier.push(s);
        while (!frontier.empty()) {
            NodeId v = frontier.front();
            frontier.pop();
            visited.push(v);
            for (NodeId w : g.neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    frontier.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    pred[w].push_back(v);
                }
            }
        }
        std::vector<double> delta(n, 0.0);
        while (!visited.empty()) {
            NodeId w = visited.top();
            visited.pop();
            for (NodeId v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    for (double& x : bc) x *= 0.5;
    return bc;
}

std::vector<double> closeness(const CsrGraph& g) {
    const auto n = g.num_nodes();
    std::vector<double> cc(n, 0.0);
    for (NodeId s = 0; s < n; ++s) {
        std::vector<long> dist(n, -1);
        std::queue<NodeId> q;
        dist[s] = 0;
        q.push(s);
        std::size_t reached = 0;
        double total = 0.0;
        while (!q.empty()) {
            NodeId v = q.front();
            q.pop();
            ++reached;
            total += static_cast<double>(dist[v]);
            for (NodeId w : g.neighbors(v)) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
            }
        }
        if (reached > 1 && n > 1) {
            const double r1 = static_cast<double>(reached - 1);
            cc[s] = (r1 / static_cast<double>(n - 1)) * (r1 / total);
        }
    }
    return cc;
}

std::vector<double> pagerank(const CsrGraph& g, double damping, double tol, std::size_t max_iter) {
    const auto n = g.num_nodes();
    if (n == 0) return {};
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    for (std::size_t it = 0; it < max_iter; ++it) {
        std::vector<double> next(n, 0.0);
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            const auto d = g.degree(v);
            if (d == 0) dangling += p[v];
            for (NodeId w : g.neighbors(v)) next[w] += damping * p[v] / static_cast<double>(d);
        }
        const double base = ((1.0 - damping) + damping * dangling) / static_cast<double>(n);
        for (double& x : next) x += base;
        double change = 0.0;
        for (std::size_t v = 0; v < n; ++v) change += std::abs(next[v] - p[v]);
        p = std::move(next);
        if (change < tol) break;
    }
    double total = 0.0;
    for (double x : p) total += x;
    for (double& x : p) x /= total;
    return p;
}

void assign_nearest(const Matrix& points, const Matrix& centroids,
                    std::span<std::size_t> cluster_of, std::span<double> distance) {
    for (std::size_t r = 0; r < points.rows(); ++r) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centroids.rows(); ++c) {
            const double d = squared_distance(points.row(r), centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        cluster_of[r] = best;
        distance[r] = best_d;
    }
}

Matrix spmm(const SparseMatrix& a, const Matrix& x) {
    if (x.rows() != a.n) throw ShapeError("spmm: dimension mismatch");
    Matrix out(a.n, x.cols());
    for (std::size_t r = 0; r < a.n; ++r) {
        for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            for (std::size_t j = 0; j < x.cols(); ++j) out(r, j) += a.values[k] * x(a.cols[k], j);
        }
    }
    return out;
}

SignTensor sign_features(const SparseMatrix& a_tilde, const Matrix& x, std::size_t hops) {
    if (x.rows() != a_tilde.n) throw ShapeError("sign_features: dimension mismatch");
    const auto f = x.cols();
    SignTensor t;
    t.hops = hops;
    t.source_feature_dim = f;
    t.z = Matrix(x.rows(), (hops + 1) * f);
    Matrix current = x;
    for (std::size_t k = 0; k <= hops; ++k) {
        for (std::size_t r = 0; r < x.rows(); ++r) {
            for (std::size_t j = 0; j < f; ++j) t.z(r, k * f + j) = current(r, j);
        }
        if (k < hops) current = serial::spmm(a_tilde, current);
    }
    return t;
}

QuantizedBlock quantize(const Matrix& h, const QuantizeOptions& options) {
    if (options.bits < 1 || options.bits > 8) throw ParameterError("quantization bits must be in 1..8");
    for (double x : h.data()) {
        if (!std::isfinite(x)) throw DataError("quantize: input contains NaN or Inf");
    }
    QuantizedBlock q;
    q.bits = options.bits;
    q.group_size = options.group_size > 0 ? options.group_size : std::max<std::size_t>(h.cols(), 1);
    q.rows = h.rows();
    q.cols = h.cols();
    const auto count = q.count();
    const double levels = static_cast<double>(q.levels());
    q.packed.assign(packed_size(count, q.bits), 0);
    auto data = h.data();
    for (std::size_t begin = 0; begin < count; begin += q.group_size) {
        const auto end = std::min(begin + q.group_size, count);
        double lo = data[begin];
        double hi = data[begin];
        for (std::size_t i = begin; i < end; ++i) {
            lo = std::min(lo, data[i]);
            hi = std::max(hi, data[i]);
        }
        const double range = hi - lo;
        q.zero.push_back(lo);
        q.range.push_back(range);
        const std::uint64_t group = begin / q.group_size;
        std::mt19937_64 rng;
        if (options.rounding == Rounding::Stochastic) {
            std::uint64_t x = options.seed ^ group;
            x += 0x9E3779B97F4A7C15ull;
            x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
            x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
            rng.seed(x ^ (x >> 31));
        }
        for (std::size_t i = begin; i < end; ++i) {
            std::uint32_t code = 0;
            if (range != 0.0) {
                const double scaled = (data[i] - lo) / range * levels;
                const double offset = options.rounding == Rounding::Nearest
                                          ? 0.5
                                          : static_cast<double>(rng() >> 11) * 0x1.0p-53;
                code = static_cast<std::uint32_t>(std::clamp(std::floor(scaled + offset), 0.0, levels));
            }
            for (unsigned b = 0; b < q.bits; ++b) {
                if (code & (1u << b)) {
                    const std::size_t bit = i * q.bits + b;
                    q.packed[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
                }
            }
        }
    }
    return q;
}

Matrix dequantize(const QuantizedBlock& q) {
    if (q.packed.size() != packed_size(q.count(), q.bits)) {
        throw CorruptionError("quantized block payload size does not match its shape");
    }
    Matrix out(q.rows, q.cols);
    auto data = out.data();
    const double levels = static_cast<double>(q.levels());
    for (std::size_t i = 0; i < q.count(); ++i) {
        std::uint32_t code = 0;
        for (unsigned b = 0; b < q.bits; ++b) {
            const std::size_t bit = i * q.bits + b;
            if (q.packed[bit / 8] & (1u << (bit % 8))) code |= 1u << b;
        }
        const auto g = i / q.group_size;
        data[i] = q.zero[g] + q.range[g] * (static_cast<double>(code) / levels);
    }
    return out;
}

}  // namespace gck::serial
