#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "gck/error.hpp"
#include "gck/parallel.hpp"
#include "gck/quantizer.hpp"
#include "gck/reference.hpp"
#include "oracles.hpp"

namespace gck {
namespace {

Matrix row(std::vector<double> v) {
    const auto n = v.size();
    return Matrix(1, n, std::move(v));
}

std::vector<std::uint32_t> codes(const QuantizedBlock& q) {
    std::vector<std::uint32_t> c(q.count());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = q.code(i);
    return c;
}

TEST(Quantize, LatticeValuesRoundTripExactly) {
    const auto h = row({0, 1, 2, 3});
    const auto q = quantize(h, {2});
    EXPECT_EQ(q.zero, std::vector<double>({0.0}));
    EXPECT_EQ(q.range, std::vector<double>({3.0}));
    EXPECT_EQ(codes(q), std::vector<std::uint32_t>({0, 1, 2, 3}));
    EXPECT_EQ(dequantize(q), h);
}

TEST(Quantize, ConstantGroup) {
    const auto h = row({5, 5, 5});
    const auto q = quantize(h, {2});
    EXPECT_EQ(q.range, std::vector<double>({0.0}));
    EXPECT_EQ(codes(q), std::vector<std::uint32_t>({0, 0, 0}));
    EXPECT_EQ(dequantize(q), h);
}

TEST(Quantize, EndpointsAreExact) {
    oracle::Rng rng(1);
    for (unsigned bits : {1u, 2u, 3u, 5u, 8u}) {
        const auto h = oracle::random_matrix(rng, 7, 9, -3.7, 11.2);
        const auto q = quantize(h, {bits});
        const auto d = dequantize(q);
        for (std::size_t r = 0; r < 7; ++r) {
            for (std::size_t c = 0; c < 9; ++c) {
                if (q.code(r * 9 + c) == 0) EXPECT_EQ(d(r, c), q.zero[r]);
                if (q.code(r * 9 + c) == q.levels()) EXPECT_EQ(d(r, c), q.zero[r] + q.range[r]);
            }
        }
    }
}

TEST(Quantize, ErrorBoundAndMonotonicity) {
    oracle::Rng rng(2);
    for (unsigned bits = 1; bits <= 8; ++bits) {
        for (std::size_t group : {0u, 1u, 5u, 64u}) {
            const auto h = oracle::random_matrix(rng, 30, 17, 0.0, 1.0);
            QuantizeOptions opt;
            opt.bits = bits;
            opt.group_size = group;
            const auto q = quantize(h, opt);
            const auto d = dequantize(q);
            const auto flat = h.data();
            const auto back = d.data();
            const std::size_t gs = q.group_size;
            for (std::size_t i = 0; i < flat.size(); ++i) {
                const std::size_t g = i / gs;
                ASSERT_LE(std::abs(back[i] - flat[i]), q.range[g] / (2.0 * q.levels()) * (1 + 1e-12) + 1e-15);
                for (std::size_t j = g * gs; j < std::min(flat.size(), (g + 1) * gs); ++j) {
                    if (flat[i] <= flat[j]) ASSERT_LE(q.code(i), q.code(j));
                }
            }
        }
    }
}

TEST(Quantize, RequantizingIsIdempotent) {
    oracle::Rng rng(3);
    for (unsigned bits : {1u, 2u, 4u, 8u}) {
        for (int t = 0; t < 20; ++t) {
            const auto h = oracle::random_matrix(rng, 1 + rng() % 20, 1 + rng() % 20, -5, 5);
            const auto q = quantize(h, {bits});
            const auto q2 = quantize(dequantize(q), {bits});
            EXPECT_EQ(codes(q2), codes(q));
        }
    }
}

TEST(Quantize, StorageAndPacking) {
    oracle::Rng rng(4);
    const auto h = oracle::random_matrix(rng, 13, 7);
    for (unsigned bits : {1u, 2u, 3u, 8u}) {
        const auto q = quantize(h, {bits});
        EXPECT_EQ(q.packed.size(), (91 * bits + 7) / 8);
        EXPECT_EQ(q.storage_bytes(), q.packed.size() + 2 * sizeof(double) * 13);
        EXPECT_EQ(packed_size(91, bits), q.packed.size());
    }
    // LSB-first: codes 0,1,2,3 at 2 bits pack into 0b11100100.
    EXPECT_EQ(quantize(row({0, 1, 2, 3}), {2}).packed, std::vector<std::uint8_t>({0xE4}));
}

TEST(Quantize, InvalidInputs) {
    EXPECT_THROW(quantize(row({1, 2}), {0}), ParameterError);
    EXPECT_THROW(quantize(row({1, 2}), {9}), ParameterError);
    EXPECT_THROW(quantize(row({1, std::numeric_limits<double>::quiet_NaN()}), {2}), DataError);
    EXPECT_THROW(quantize(row({1, std::numeric_limits<double>::infinity()}), {2}), DataError);
}

TEST(Dequantize, InconsistentMetadataIsCorruption) {
    auto q = quantize(row({0, 1, 2, 3}), {2});
    q.packed.push_back(0);
    EXPECT_THROW(dequantize(q), CorruptionError);
    q = quantize(row({0, 1, 2, 3}), {2});
    q.zero.push_back(1.0);
    EXPECT_THROW(dequantize(q), CorruptionError);
}

TEST(Quantize, StochasticRoundingIsSeededAndUnbiased) {
    const Matrix h(1, 20000, 0.3);
    Matrix with_ends = h;
    with_ends(0, 0) = 0.0;
    with_ends(0, 1) = 1.0;
    QuantizeOptions opt;
    opt.bits = 1;
    opt.rounding = Rounding::Stochastic;
    opt.seed = 5;
    const auto q = quantize(with_ends, opt);
    EXPECT_EQ(q, quantize(with_ends, opt));
    const auto d = dequantize(q);
    double mean = 0.0;
    for (std::size_t i = 2; i < 20000; ++i) mean += d(0, i);
    mean /= 19998.0;
    EXPECT_NEAR(mean, 0.3, 0.02);
}

TEST(Quantize, ParallelMatchesSerialReference) {
    oracle::Rng rng(5);
    const auto h = oracle::random_matrix(rng, 3000, 33, -2, 2);
    for (unsigned bits : {1u, 2u, 3u, 8u}) {
        QuantizeOptions opt;
        opt.bits = bits;
        opt.group_size = bits == 3 ? 100 : 0;
        const auto ref = serial::quantize(h, opt);
        for (int w : {1, 3}) {
            set_workers(w);
            const auto q = quantize(h, opt);
            EXPECT_EQ(q, ref);
            EXPECT_EQ(dequantize(q), serial::dequantize(ref));
        }
    }
    QuantizeOptions stochastic;
    stochastic.rounding = Rounding::Stochastic;
    stochastic.seed = 3;
    set_workers(1);
    const auto one = quantize(h, stochastic);
    set_workers(3);
    EXPECT_EQ(quantize(h, stochastic), one);
    EXPECT_EQ(serial::quantize(h, stochastic), one);
    set_workers(0);
}

TEST(Quantize, DebugDumpIsJson) {
    const auto q = quantize(row({0, 1, 2, 3}), {2});
    const auto j = nlohmann::json::parse(debug_dump(q));
    EXPECT_EQ(j["bits"], 2);
    EXPECT_EQ(j["groups"].size(), 1u);
    EXPECT_EQ(j["codes_hex"], "e4");
}

}  // namespace
}  // namespace gck
