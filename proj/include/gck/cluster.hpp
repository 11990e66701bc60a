#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gck/matrix.hpp"

namespace gck {

// Weights that make squared Euclidean distance on [sqrt(alpha) X, sqrt(beta) Y]
// independent of the feature and label widths; gamma trades features (1)
// against labels (0).
struct NormalizationParams {
    double gamma = 0.5;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t feature_dim = 0;
    std::size_t label_dim = 0;

    // Throws ParameterError unless gamma is in [0, 1], ShapeError if a dim is 0.
    static NormalizationParams make(double gamma, std::size_t feature_dim, std::size_t label_dim);
};

// Per-column min-max scaling into [0, 1]; constant columns become 0.
Matrix scale_normalize(const Matrix& x);

// M = [sqrt(alpha) * X, sqrt(beta) * Y]. Throws ShapeError on a row-count
// mismatch or an empty side.
Matrix build_m(const Matrix& x, const Matrix& y, double gamma);

struct KMeansParams {
    std::size_t eta = 100;
    std::uint64_t seed = 0;
    std::size_t max_iter = 300;
    double tol = 1e-6;
};

// Clusters are relabeled so that cluster indices follow the smallest row
// index they contain; every cluster index in [0, eta) is used when the rows
// have at least eta distinct points.
struct ClusterAssignment {
    std::vector<std::size_t> cluster_of;
    std::size_t eta = 0;
    Matrix centroids;
    double inertia = 0.0;
    std::size_t iterations = 0;

    std::vector<std::size_t> sizes() const;
};

// Lloyd iterations from k-means++ seeding. Empty clusters are re-seeded from
// the point farthest from its centroid. Throws ParameterError for eta == 0 or
// eta > rows.
ClusterAssignment kmeans(const Matrix& points, const KMeansParams& params);

// Squared Euclidean distance between rows.
double squared_distance(std::span<const double> a, std::span<const double> b);

// Nearest centroid for every row (ties to the lower index), OpenMP-parallel.
void assign_nearest(const Matrix& points, const Matrix& centroids,
                    std::span<std::size_t> cluster_of, std::span<double> distance);

// Surviving-node budget per cluster: proportional to cluster size, integerized
// by largest remainder (ties to the lower index) so the total is exactly psi.
// Non-empty clusters get at least one when psi allows it; no budget exceeds its
// cluster size. Throws ParameterError for psi == 0 or psi > total size.
std::vector<std::size_t> distribute_budget(std::span<const std::size_t> cluster_sizes,
                                           std::size_t psi);

// "node_id,cluster" rows for the given ids.
void write_assignment_csv(std::ostream& out, const ClusterAssignment& a,
                          std::span<const std::uint32_t> node_ids);

}  // namespace gck
