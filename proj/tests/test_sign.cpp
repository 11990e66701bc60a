#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "gck/error.hpp"
#include "gck/parallel.hpp"
#include "gck/reference.hpp"
#include "gck/sign.hpp"
#include "oracles.hpp"

namespace gck {
namespace {

Graph single_edge() {
    const std::vector<Edge> e{{0, 1}};
    return Graph::from_edges(e, 2);
}

TEST(NormalizedAdjacency, Examples) {
    EXPECT_EQ(normalized_adjacency(Graph::from_edges({}, 1)).to_dense(), Matrix(1, 1, 1.0));
    EXPECT_EQ(normalized_adjacency(single_edge()).to_dense(), Matrix(2, 2, 0.5));
    const std::vector<Edge> tri{{0, 1}, {1, 2}, {0, 2}};
    const auto k3 = normalized_adjacency(Graph::from_edges(tri, 3)).to_dense();
    for (double v : k3.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(NormalizedAdjacency, DenseOracleSymmetryAndSpectrum) {
    oracle::Rng rng(1);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 1 + rng() % 60;
        const auto g = oracle::random_graph(rng, n, 0.1);
        const auto a = normalized_adjacency(g);
        const auto dense = a.to_dense();
        const auto want = oracle::normalized_adjacency(oracle::adjacency(g));
        Eigen::MatrixXd got(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                EXPECT_EQ(dense(i, j), dense(j, i));
                EXPECT_NEAR(dense(i, j), want(i, j), 1e-15);
                got(i, j) = dense(i, j);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(got);
        EXPECT_LE(solver.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-9);
    }
}

TEST(NormalizedAdjacency, SkipsDeadNodes) {
    const std::vector<Edge> e{{0, 1}, {1, 2}};
    auto g = Graph::from_edges(e, 3);
    g.merge_node(0, 1);
    const auto a = normalized_adjacency(g);
    EXPECT_EQ(a.n, 2u);
    EXPECT_EQ(a.to_dense(), Matrix(2, 2, 0.5));
}

TEST(SignFeatures, ZeroHopsIsIdentityBlock) {
    oracle::Rng rng(2);
    const auto g = oracle::random_graph(rng, 10, 0.3);
    const auto x = oracle::random_matrix(rng, 10, 4);
    const auto z = sign_features(normalized_adjacency(g), x, 0);
    EXPECT_EQ(z.z, x);
    EXPECT_EQ(z.hops, 0u);
}

TEST(SignFeatures, TwoHopsOnSingleEdge) {
    const Matrix x(2, 1, std::vector<double>{1, 0});
    const auto z = sign_features(normalized_adjacency(single_edge()), x, 2);
    EXPECT_EQ(z.z, Matrix(2, 3, std::vector<double>{1, 0.5, 0.5, 0, 0.5, 0.5}));
    EXPECT_EQ(z.block(1), Matrix(2, 1, 0.5));
}

TEST(SignFeatures, ShapeMismatch) {
    EXPECT_THROW(sign_features(normalized_adjacency(single_edge()), Matrix(3, 2), 1), ShapeError);
}

TEST(SignFeatures, RecurrenceMatchesDenseOracle) {
    oracle::Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + rng() % 99;
        const auto g = oracle::random_graph(rng, n, 0.05);
        const auto x = oracle::random_matrix(rng, n, 3);
        const std::size_t hops = 3;
        const auto z = sign_features(normalized_adjacency(g), x, hops);
        const auto a = oracle::normalized_adjacency(oracle::adjacency(g));
        Eigen::MatrixXd block(n, 3);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 3; ++j) block(i, j) = x(i, j);
        }
        for (std::size_t k = 0; k <= hops; ++k) {
            const auto got = z.block(k);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < 3; ++j) ASSERT_NEAR(got(i, j), block(i, j), 1e-9);
            }
            block = a * block;
        }
    }
}

// Entries can exceed 1 next to hubs, but no hop grows the L2 norm.
TEST(SignFeatures, HopNormsNeverGrow) {
    oracle::Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto g = oracle::random_graph(rng, 20, 0.2);
        const auto z = sign_features(normalized_adjacency(g), oracle::random_matrix(rng, 20, 1), 4);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= 4; ++k) {
            const auto block = z.block(k);
            double norm = 0.0;
            for (double v : block.data()) norm += v * v;
            EXPECT_LE(std::sqrt(norm), prev * (1 + 1e-12));
            prev = std::sqrt(norm);
        }
    }
}

TEST(SignFeatures, ParallelMatchesSerialReference) {
    oracle::Rng rng(5);
    const auto g = oracle::random_graph(rng, 2000, 0.004);
    const auto a = normalized_adjacency(g);
    const auto x = oracle::random_matrix(rng, 2000, 8);
    const auto ref = serial::sign_features(a, x, 3);
    for (int w : {1, 2, 4}) {
        set_workers(w);
        EXPECT_EQ(sign_features(a, x, 3).z, ref.z);
    }
    set_workers(0);
}

TEST(SignIo, BinaryRoundTripIsExact) {
    oracle::Rng rng(6);
    const auto g = oracle::random_graph(rng, 30, 0.1);
    const auto z = sign_features(normalized_adjacency(g), oracle::random_matrix(rng, 30, 5), 2);
    std::stringstream buf;
    write_sign_binary(buf, z);
    EXPECT_EQ(buf.str().size(), 8 + 3 * 8 + 30 * 15 * 8);
    EXPECT_EQ(buf.str().substr(0, 8), "GCKSIGN1");
    const auto back = read_sign_binary(buf);
    EXPECT_EQ(back.z, z.z);
    EXPECT_EQ(back.hops, 2u);
    EXPECT_EQ(back.source_feature_dim, 5u);
}

TEST(SignIo, CorruptInputsAreRejected) {
    std::stringstream bad_magic("NOTSIGN1xxxxxxxxxxxxxxxxxxxxxxxx");
    EXPECT_THROW(read_sign_binary(bad_magic), CorruptionError);

    const auto z = sign_features(normalized_adjacency(single_edge()), Matrix(2, 1, 1.0), 1);
    std::stringstream buf;
    write_sign_binary(buf, z);
    std::stringstream truncated(buf.str().substr(0, buf.str().size() - 3));
    EXPECT_THROW(read_sign_binary(truncated), CorruptionError);
}

TEST(SignIo, CsvHeader) {
    const auto z = sign_features(normalized_adjacency(single_edge()), Matrix(2, 1, 1.0), 1);
    std::ostringstream out;
    write_sign_csv(out, z);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "node_id,h0_f0,h1_f0");
}

}  // namespace
}  // namespace gck
