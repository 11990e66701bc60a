#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gck/graph.hpp"
#include "gck/matrix.hpp"

namespace gck {

// Square CSR matrix.
struct SparseMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_offsets;  // n + 1
    std::vector<std::size_t> cols;
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }
    double at(std::size_t r, std::size_t c) const;
    Matrix to_dense() const;
};

// D^-1/2 (A + I) D^-1/2 with D = 1 + degree, over the alive nodes of g in
// ascending id order. Isolated nodes get a diagonal entry of 1.
SparseMatrix normalized_adjacency(const CsrGraph& g);
SparseMatrix normalized_adjacency(const Graph& g);

// out = a * x, row-parallel.
Matrix spmm(const SparseMatrix& a, const Matrix& x);

// Concatenated hop blocks [X, AX, A^2 X, ..., A^hops X].
struct SignTensor {
    Matrix z;
    std::size_t hops = 0;
    std::size_t source_feature_dim = 0;

    std::size_t num_nodes() const { return z.rows(); }
    Matrix block(std::size_t k) const;
};

// Throws ShapeError if x.rows() != a.n.
SignTensor sign_features(const SparseMatrix& a_tilde, const Matrix& x, std::size_t hops);

// Binary layout, all little-endian: 8-byte magic "GCKSIGN1", u64 nodes,
// u64 feature dim, u64 hops, then nodes * (hops + 1) * F float64 row-major.
void write_sign_binary(std::ostream& out, const SignTensor& t);
SignTensor read_sign_binary(std::istream& in);
void write_sign_binary_file(const std::string& path, const SignTensor& t);
SignTensor read_sign_binary_file(const std::string& path);

void write_sign_csv(std::ostream& out, const SignTensor& t);

}  // namespace gck
