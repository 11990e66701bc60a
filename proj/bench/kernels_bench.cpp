// Serial reference kernels against their OpenMP counterparts. The second
// argument of the parallel variants is the worker count.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gck/centrality.hpp"
#include "gck/cluster.hpp"
#include "gck/dataset.hpp"
#include "gck/parallel.hpp"
#include "gck/quantizer.hpp"
#include "gck/reference.hpp"
#include "gck/sign.hpp"

namespace {

using namespace gck;

const CsrGraph& graph(std::size_t n) {
    static std::size_t cached_n = 0;
    static CsrGraph cached;
    if (cached_n != n) {
        SbmParams p;
        p.num_nodes = n;
        p.p_in = 8.0 / static_cast<double>(n);
        p.p_out = 1.0 / static_cast<double>(n);
        cached = freeze(generate_sbm(p).graph);
        cached_n = n;
    }
    return cached;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(rows, cols);
    for (double& v : m.data()) v = u(rng);
    return m;
}

std::vector<NodeId> all_sources(std::size_t n) {
    std::vector<NodeId> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<NodeId>(i);
    return s;
}

void workers(benchmark::State& state) { set_workers(static_cast<int>(state.range(1))); }

void BM_BetweennessSerial(benchmark::State& state) {
    const auto& g = graph(static_cast<std::size_t>(state.range(0)));
    const auto sources = all_sources(g.num_nodes());
    for (auto _ : state) benchmark::DoNotOptimize(serial::betweenness(g, sources));
}
void BM_BetweennessParallel(benchmark::State& state) {
    const auto& g = graph(static_cast<std::size_t>(state.range(0)));
    workers(state);
    for (auto _ : state) benchmark::DoNotOptimize(betweenness_centrality(g));
}

void BM_ClosenessSerial(benchmark::State& state) {
    const auto& g = graph(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::closeness(g));
}
void BM_ClosenessParallel(benchmark::State& state) {
    const auto& g = graph(static_cast<std::size_t>(state.range(0)));
    workers(state);
    for (auto _ : state) benchmark::DoNotOptimize(closeness_centrality(g));
}

void BM_PageRankSerial(benchmark::State& state) {
    const auto& g = graph(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(serial::pagerank(g, 0.85, 1e-8, 1000));
}
void BM_PageRankParallel(benchmark::State& state) {
    const auto& g = graph(static_cast<std::size_t>(state.range(0)));
    workers(state);
    for (auto _ : state) benchmark::DoNotOptimize(pagerank_centrality(g));
}

void BM_AssignNearestSerial(benchmark::State& state) {
    const auto points = random_matrix(static_cast<std::size_t>(state.range(0)), 32, 1);
    const auto centroids = random_matrix(100, 32, 2);
    std::vector<std::size_t> cluster(points.rows());
    std::vector<double> dist(points.rows());
    for (auto _ : state) serial::assign_nearest(points, centroids, cluster, dist);
}
void BM_AssignNearestParallel(benchmark::State& state) {
    const auto points = random_matrix(static_cast<std::size_t>(state.range(0)), 32, 1);
    const auto centroids = random_matrix(100, 32, 2);
    std::vector<std::size_t> cluster(points.rows());
    std::vector<double> dist(points.rows());
    workers(state);
    for (auto _ : state) assign_nearest(points, centroids, cluster, dist);
}

void BM_SignSerial(benchmark::State& state) {
    const auto a = normalized_adjacency(graph(static_cast<std::size_t>(state.range(0))));
    const auto x = random_matrix(a.n, 64, 3);
    for (auto _ : state) benchmark::DoNotOptimize(serial::sign_features(a, x, 3));
}
void BM_SignParallel(benchmark::State& state) {
    const auto a = normalized_adjacency(graph(static_cast<std::size_t>(state.range(0))));
    const auto x = random_matrix(a.n, 64, 3);
    workers(state);
    for (auto _ : state) benchmark::DoNotOptimize(sign_features(a, x, 3));
}

void BM_QuantizeSerial(benchmark::State& state) {
    const auto h = random_matrix(static_cast<std::size_t>(state.range(0)), 128, 4);
    for (auto _ : state) benchmark::DoNotOptimize(serial::quantize(h, {2}));
}
void BM_QuantizeParallel(benchmark::State& state) {
    const auto h = random_matrix(static_cast<std::size_t>(state.range(0)), 128, 4);
    workers(state);
    for (auto _ : state) benchmark::DoNotOptimize(quantize(h, {2}));
}

void parallel_args(benchmark::internal::Benchmark* b, std::int64_t size) {
    for (std::int64_t w : {1, 2, 4}) b->Args({size, w});
}

}  // namespace

BENCHMARK(BM_BetweennessSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BetweennessParallel)->Apply([](auto* b) { parallel_args(b, 2000); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosenessSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosenessParallel)->Apply([](auto* b) { parallel_args(b, 2000); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PageRankSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PageRankParallel)->Apply([](auto* b) { parallel_args(b, 20000); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignNearestSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignNearestParallel)->Apply([](auto* b) { parallel_args(b, 20000); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SignParallel)->Apply([](auto* b) { parallel_args(b, 20000); })->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuantizeSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuantizeParallel)->Apply([](auto* b) { parallel_args(b, 20000); })->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
