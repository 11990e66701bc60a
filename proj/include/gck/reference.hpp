#pragma once

// Single-threaded reference versions of the OpenMP kernels. They follow the
// textbook loop order and exist so tests and benchmarks can check the
// parallel kernels against them.

#include <span>
#include <vector>

#include "gck/centrality.hpp"
#include "gck/matrix.hpp"
#include "gck/quantizer.hpp"
#include "gck/sign.hpp"

namespace gck::serial {

std::vector<double> betweenness(const CsrGraph& g, std::span<const NodeId> sources);
std::vector<double> closeness(const CsrGraph& g);
std::vector<double> pagerank(const CsrGraph& g, double damping, double tol, std::size_t max_iter);
void assign_nearest(const Matrix& points, const Matrix& centroids,
                    std::span<std::size_t> cluster_of, std::span<double> distance);
Matrix spmm(const SparseMatrix& a, const Matrix& x);
SignTensor sign_features(const SparseMatrix& a_tilde, const Matrix& x, std::size_t hops);
QuantizedBlock quantize(const Matrix& h, const QuantizeOptions& options);
Matrix dequantize(const QuantizedBlock& q);

}  // namespace gck::serial
