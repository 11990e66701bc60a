#include "gck/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "gck/error.hpp"

namespace gck {

namespace {

// Uniform double in [0, 1) from the raw engine output; independent of the
// standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

Matrix kmeans_plus_plus(const Matrix& points, std::size_t eta, std::mt19937_64& rng) {
    const auto n = points.rows();
    Matrix centroids(eta, points.cols());
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t pick = uniform_index(rng, n);
    for (std::size_t c = 0; c < eta; ++c) {
        auto src = points.row(pick);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centroids.row(c)));
            total += nearest[i];
        }
        if (c + 1 == eta) break;
        if (total <= 0.0) {
            pick = uniform_index(rng, n);
            continue;
        }
        double target = unit_uniform(rng) * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= nearest[i];
            if (target < 0.0 && nearest[i] > 0.0) {
                pick = i;
                break;
            }
        }
        while (nearest[pick] <= 0.0 && pick > 0) --pick;
    }
    return centroids;
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
void reseed_empty(const Matrix& points, Matrix& centroids, std::vector<std::size_t>& cluster_of,
                  std::vector<double>& distance) {
    const auto eta = centroids.rows();
    std::vector<std::size_t> counts(eta, 0);
    for (auto c : cluster_of) ++counts[c];
    for (std::size_t c = 0; c < eta; ++c) {
        if (counts[c] > 0) continue;
        std::size_t best = points.rows();
        for (std::size_t i = 0; i < points.rows(); ++i) {
            if (counts[cluster_of[i]] < 2) continue;
            if (best == points.rows() || distance[i] > distance[best]) best = i;
        }
        if (best == points.rows()) return;
        --counts[cluster_of[best]];
        cluster_of[best] = c;
        counts[c] = 1;
        distance[best] = 0.0;
        auto src = points.row(best);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    }
}

double update_centroids(const Matrix& points, Matrix& centroids,
                        const std::vector<std::size_t>& cluster_of) {
    const auto eta = centroids.rows();
    const auto d = points.cols();
    Matrix sums(eta, d);
    std::vector<std::size_t> counts(eta, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        auto dst = sums.row(cluster_of[i]);
        auto src = points.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
        ++counts[cluster_of[i]];
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < eta; ++c) {
        if (counts[c] == 0) continue;
        auto row = sums.row(c);
        for (double& x : row) x /= static_cast<double>(counts[c]);
        max_shift = std::max(max_shift, std::sqrt(squared_distance(row, centroids.row(c))));
        std::copy(row.begin(), row.end(), centroids.row(c).begin());
    }
    return max_shift;
}

}  // namespace

NormalizationParams NormalizationParams::make(double gamma, std::size_t feature_dim, std::size_t label_dim) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in [0, 1]");
    if (feature_dim == 0 || label_dim == 0) {
        throw ShapeError("feature and label dimensions must both be at least 1");
    }
    const double widest = static_cast<double>(std::max(feature_dim, label_dim));
    NormalizationParams p;
    p.gamma = gamma;
    p.feature_dim = feature_dim;
    p.label_dim = label_dim;
    p.alpha = gamma * widest / static_cast<double>(feature_dim);
    p.beta = (1.0 - gamma) * widest / static_cast<double>(label_dim);
    return p;
}

Matrix scale_normalize(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.rows(); ++i) {
            lo = std::min(lo, x(i, j));
            hi = std::max(hi, x(i, j));
        }
        if (!(hi > lo)) continue;
        const double span = hi - lo;
        for (std::size_t i = 0; i < x.rows(); ++i) out(i, j) = (x(i, j) - lo) / span;
    }
    return out;
}

Matrix build_m(const Matrix& x, const Matrix& y, double gamma) {
    if (x.rows() != y.rows()) {
        throw ShapeError("features have " + std::to_string(x.rows()) + " rows but labels have " +
                         std::to_string(y.rows()));
    }
    const auto p = NormalizationParams::make(gamma, x.cols(), y.cols());
    const double wx = std::sqrt(p.alpha);
    const double wy = std::sqrt(p.beta);
    const auto f = x.cols();
    Matrix m(x.rows(), f + y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto dst = m.row(i);
        auto xs = x.row(i);
        auto ys = y.row(i);
        for (std::size_t j = 0; j < f; ++j) dst[j] = wx * xs[j];
        for (std::size_t j = 0; j < ys.size(); ++j) dst[f + j] = wy * ys[j];
    }
    return m;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

void assign_nearest(const Matrix& points, const Matrix& centroids,
                    std::span<std::size_t> cluster_of, std::span<double> distance) {
    const auto n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
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

std::vector<std::size_t> ClusterAssignment::sizes() const {
    std::vector<std::size_t> out(eta, 0);
    for (auto c : cluster_of) ++out[c];
    return out;
}

ClusterAssignment kmeans(const Matrix& points, const KMeansParams& params) {
    const auto n = points.rows();
    if (params.eta == 0) throw ParameterError("kmeans needs eta >= 1");
    if (params.eta > n) {
        throw ParameterError("kmeans eta " + std::to_string(params.eta) + " exceeds " +
                             std::to_string(n) + " points");
    }
    std::mt19937_64 rng(params.seed);
    ClusterAssignment a;
    a.eta = params.eta;
    a.centroids = kmeans_plus_plus(points, params.eta, rng);
    a.cluster_of.assign(n, 0);
    std::vector<double> distance(n, 0.0);
    while (a.iterations < params.max_iter) {
        assign_nearest(points, a.centroids, a.cluster_of, distance);
        reseed_empty(points, a.centroids, a.cluster_of, distance);
        const double shift = update_centroids(points, a.centroids, a.cluster_of);
        ++a.iterations;
        if (shift < params.tol) break;
    }
    if (a.iterations == 0) {
        assign_nearest(points, a.centroids, a.cluster_of, distance);
        reseed_empty(points, a.centroids, a.cluster_of, distance);
    }

    // Canonical labels: order clusters by their first member.
    std::vector<std::size_t> first(params.eta, n);
    for (std::size_t i = n; i-- > 0;) first[a.cluster_of[i]] = i;
    std::vector<std::size_t> order(params.eta);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return first[l] < first[r]; });
    std::vector<std::size_t> relabel(params.eta);
    Matrix centroids(params.eta, points.cols());
    for (std::size_t c = 0; c < params.eta; ++c) {
        relabel[order[c]] = c;
        auto src = a.centroids.row(order[c]);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
    }
    a.centroids = std::move(centroids);
    a.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a.cluster_of[i] = relabel[a.cluster_of[i]];
        a.inertia += squared_distance(points.row(i), a.centroids.row(a.cluster_of[i]));
    }
    return a;
}

std::vector<std::size_t> distribute_budget(std::span<const std::size_t> cluster_sizes, std::size_t psi) {
    const auto k = cluster_sizes.size();
    const std::size_t total = std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), std::size_t{0});
    if (psi == 0) throw ParameterError("node budget psi must be positive");
    if (psi > total) {
        throw ParameterError("node budget psi " + std::to_string(psi) + " exceeds " +
                             std::to_string(total) + " nodes");
    }
    __extension__ typedef unsigned __int128 Wide;
    std::vector<std::size_t> budget(k);
    std::vector<std::size_t> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const Wide scaled = static_cast<Wide>(psi) * cluster_sizes[i];
        budget[i] = static_cast<std::size_t>(scaled / total);
        remainder[i] = static_cast<std::size_t>(scaled % total);
        assigned += budget[i];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return remainder[l] > remainder[r]; });
    for (std::size_t j = 0; assigned < psi; ++j, ++assigned) ++budget[order[j]];

    const auto non_empty = static_cast<std::size_t>(
        std::count_if(cluster_sizes.begin(), cluster_sizes.end(), [](std::size_t s) { return s > 0; }));
    if (psi >= non_empty) {
        for (std::size_t i = 0; i < k; ++i) {
            if (cluster_sizes[i] == 0 || budget[i] > 0) continue;
            auto donor = static_cast<std::size_t>(std::max_element(budget.begin(), budget.end()) - budget.begin());
            --budget[donor];
            budget[i] = 1;
        }
    }

    // Surplus over a cluster's size goes to the largest clusters with room.
    for (std::size_t i = 0; i < k; ++i) {
        while (budget[i] > cluster_sizes[i]) {
            std::size_t target = k;
            for (std::size_t j = 0; j < k; ++j) {
                if (budget[j] >= cluster_sizes[j]) continue;
                if (target == k || cluster_sizes[j] > cluster_sizes[target]) target = j;
            }
            --budget[i];
            ++budget[target];
        }
    }
    return budget;
}

void write_assignment_csv(std::ostream& out, const ClusterAssignment& a,
                          std::span<const std::uint32_t> node_ids) {
    out << "node_id,cluster\n";
    for (std::size_t i = 0; i < a.cluster_of.size(); ++i) out << node_ids[i] << ',' << a.cluster_of[i] << '\n';
}

}  // namespace gck
