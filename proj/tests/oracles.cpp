#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace oracle {

gck::Graph random_graph(Rng& rng, std::size_t n, double p, bool connected) {
    std::vector<gck::Edge> edges;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (connected) {
        for (std::size_t v = 1; v < n; ++v) {
            std::uniform_int_distribution<std::size_t> pick(0, v - 1);
            edges.emplace_back(static_cast<gck::NodeId>(pick(rng)), static_cast<gck::NodeId>(v));
        }
    }
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (coin(rng) < p) edges.emplace_back(static_cast<gck::NodeId>(u), static_cast<gck::NodeId>(v));
        }
    }
    return gck::Graph::from_edges(edges, n);
}

Dense adjacency(const gck::Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.num_nodes());
    Dense a = Dense::Zero(n, n);
    for (const auto& [u, v] : g.edges()) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

Dense distances(const Dense& a) {
    const auto n = a.rows();
    const double inf = std::numeric_limits<double>::infinity();
    Dense d = Dense::Constant(n, n, inf);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (a(i, j) != 0.0) d(i, j) = 1.0;
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
        }
    }
    return d;
}

std::vector<double> betweenness(const Dense& a) {
    const auto n = a.rows();
    const Dense d = distances(a);
    // sigma(s, t) = (A^d(s,t))_{st}: walks of shortest length are shortest paths.
    std::vector<Dense> powers{Dense::Identity(n, n)};
    auto sigma = [&](Eigen::Index s, Eigen::Index t) {
        const auto len = static_cast<std::size_t>(d(s, t));
        while (powers.size() <= len) powers.push_back(powers.back() * a);
        return powers[len](s, t);
    };
    std::vector<double> bc(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index t = s + 1; t < n; ++t) {
            if (!std::isfinite(d(s, t))) continue;
            const double total = sigma(s, t);
            for (Eigen::Index v = 0; v < n; ++v) {
                if (v == s || v == t) continue;
                if (d(s, v) + d(v, t) != d(s, t)) continue;
                bc[static_cast<std::size_t>(v)] += sigma(s, v) * sigma(v, t) / total;
            }
        }
    }
    return bc;
}

std::vector<double> closeness(const Dense& a) {
    const auto n = a.rows();
    const Dense d = distances(a);
    std::vector<double> cc(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index v = 0; v < n; ++v) {
        double sum = 0.0;
        double reach = 0.0;
        for (Eigen::Index w = 0; w < n; ++w) {
            if (w != v && std::isfinite(d(v, w))) {
                sum += d(v, w);
                reach += 1.0;
            }
        }
        if (sum > 0.0) cc[static_cast<std::size_t>(v)] = (reach / static_cast<double>(n - 1)) * (reach / sum);
    }
    return cc;
}

std::vector<double> pagerank(const Dense& a, double damping) {
    const auto n = a.rows();
    const double nd = static_cast<double>(n);
    Dense m = Dense::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double deg = a.col(j).sum();
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = deg > 0.0 ? a(i, j) / deg : 1.0 / nd;
    }
    const Dense lhs = Dense::Identity(n, n) - damping * m;
    const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, (1.0 - damping) / nd);
    Eigen::VectorXd p = lhs.fullPivLu().solve(rhs);
    p /= p.sum();
    return {p.data(), p.data() + n};
}

std::vector<double> eigenvector(const Dense& a) {
    Eigen::SelfAdjointEigenSolver<Dense> solver(a);
    const auto n = a.rows();
    Eigen::VectorXd x = solver.eigenvectors().col(n - 1);
    if (x.sum() < 0.0) x = -x;
    x = x.cwiseAbs();
    x /= x.norm();
    return {x.data(), x.data() + n};
}

Dense normalized_adjacency(const Dense& a) {
    const auto n = a.rows();
    const Dense ai = a + Dense::Identity(n, n);
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(ai.row(i).sum());
    return inv_sqrt.asDiagonal() * ai * inv_sqrt.asDiagonal();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Contraction simulate_contraction(const Dense& adj, const std::vector<double>& phi,
                                 const std::vector<std::size_t>& cluster_of,
                                 const std::vector<std::size_t>& budget) {
    const auto n = static_cast<std::size_t>(adj.rows());
    Dense a = adj;
    std::vector<bool> alive(n, true);
    std::vector<gck::NodeId> target(n);
    std::iota(target.begin(), target.end(), gck::NodeId{0});
    constexpr gck::NodeId removed = ~gck::NodeId{0};

    for (std::size_t c = 0; c < budget.size(); ++c) {
        std::vector<std::size_t> members;
        for (std::size_t v = 0; v < n; ++v) {
            if (cluster_of[v] == c) members.push_back(v);
        }
        std::sort(members.begin(), members.end(), [&](std::size_t x, std::size_t y) {
            return phi[x] != phi[y] ? phi[x] < phi[y] : x < y;
        });
        std::size_t count = members.size();
        for (std::size_t k = 0; k < members.size() && count > budget[c]; ++k) {
            const std::size_t v = members[k];
            if (!alive[v]) continue;
            std::size_t best = n;
            for (std::size_t w = 0; w < n; ++w) {
                if (a(v, w) == 0.0) continue;
                if (best == n || phi[w] > phi[best]) best = w;  // ascending w keeps the lower id on ties
            }
            if (best != n) {
                for (std::size_t w = 0; w < n; ++w) {
                    if (a(v, w) != 0.0 && w != best) {
                        a(best, w) = 1.0;
                        a(w, best) = 1.0;
                    }
                }
                target[v] = static_cast<gck::NodeId>(best);
            } else {
                target[v] = removed;
            }
            a.row(static_cast<Eigen::Index>(v)).setZero();
            a.col(static_cast<Eigen::Index>(v)).setZero();
            alive[v] = false;
            --count;
        }
    }

    Contraction out;
    out.survivor_of.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        gck::NodeId t = static_cast<gck::NodeId>(v);
        while (t != removed && target[t] != t) t = target[t];
        out.survivor_of[v] = t;
    }
    std::vector<gck::NodeId> compact(n, removed);
    for (std::size_t v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        compact[v] = static_cast<gck::NodeId>(out.survivors.size());
        out.survivors.push_back(static_cast<gck::NodeId>(v));
    }
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (a(u, v) != 0.0) out.edges.emplace_back(compact[u], compact[v]);
        }
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, std::size_t psi) {
    const std::size_t k = sizes.size();
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::vector<std::size_t> budget(k);
    std::size_t given = 0;
    for (std::size_t i = 0; i < k; ++i) {
        budget[i] = psi * sizes[i] / total;
        given += budget[i];
    }
    // Fractional part of cluster i is (psi * s_i mod total) / total; pick the
    // largest ones one at a time, lower index first on ties.
    std::vector<bool> bumped(k, false);
    while (given < psi) {
        std::size_t pick = k;
        for (std::size_t i = 0; i < k; ++i) {
            if (bumped[i]) continue;
            if (pick == k || (psi * sizes[i]) % total > (psi * sizes[pick]) % total) pick = i;
        }
        bumped[pick] = true;
        ++budget[pick];
        ++given;
    }
    std::size_t non_empty = 0;
    for (auto s : sizes) non_empty += s > 0 ? 1 : 0;
    if (psi >= non_empty) {
        for (std::size_t i = 0; i < k; ++i) {
            if (sizes[i] == 0 || budget[i] > 0) continue;
            std::size_t donor = 0;
            for (std::size_t j = 1; j < k; ++j) {
                if (budget[j] > budget[donor]) donor = j;
            }
            --budget[donor];
            budget[i] = 1;
        }
    }
    return budget;
}

gck::Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    gck::Matrix m(rows, cols);
    for (auto& x : m.data()) x = u(rng);
    return m;
}

}  // namespace oracle
