#include "gck/sign.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "gck/error.hpp"

namespace gck {

namespace {

constexpr char kMagic[8] = {'G', 'C', 'K', 'S', 'I', 'G', 'N', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 8)) throw CorruptionError("truncated SIGN header");
    return v;
}

}  // namespace

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
        if (cols[k] == c) return values[k];
    }
    return 0.0;
}

Matrix SparseMatrix::to_dense() const {
    Matrix out(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) out(r, cols[k]) = values[k];
    }
    return out;
}

SparseMatrix normalized_adjacency(const CsrGraph& g) {
    SparseMatrix a;
    a.n = g.num_nodes();
    // 1/sqrt(d_v d_w) rather than a product of two roots: symmetric by
    // construction and exact whenever d_v d_w is a perfect square.
    std::vector<double> d(a.n);
    for (std::size_t v = 0; v < a.n; ++v) d[v] = 1.0 + static_cast<double>(g.degree(v));
    a.row_offsets.assign(a.n + 1, 0);
    a.cols.reserve(g.targets.size() + a.n);
    a.values.reserve(g.targets.size() + a.n);
    for (std::size_t v = 0; v < a.n; ++v) {
        // Neighbors are sorted; the diagonal goes in its sorted position.
        bool diagonal_done = false;
        for (NodeId w : g.neighbors(v)) {
            if (!diagonal_done && w > v) {
                a.cols.push_back(v);
                a.values.push_back(1.0 / d[v]);
                diagonal_done = true;
            }
            a.cols.push_back(w);
            a.values.push_back(1.0 / std::sqrt(d[v] * d[w]));
        }
        if (!diagonal_done) {
            a.cols.push_back(v);
            a.values.push_back(1.0 / d[v]);
        }
        a.row_offsets[v + 1] = a.cols.size();
    }
    return a;
}

SparseMatrix normalized_adjacency(const Graph& g) { return normalized_adjacency(freeze(g)); }

Matrix spmm(const SparseMatrix& a, const Matrix& x) {
    if (x.rows() != a.n) {
        throw ShapeError("spmm: matrix is " + std::to_string(a.n) + "x" + std::to_string(a.n) +
                         " but dense operand has " + std::to_string(x.rows()) + " rows");
    }
    const auto f = x.cols();
    Matrix out(a.n, f);
    const auto n = static_cast<std::int64_t>(a.n);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        auto dst = out.row(r);
        for (std::size_t k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            const double w = a.values[k];
            auto src = x.row(a.cols[k]);
            for (std::size_t j = 0; j < f; ++j) dst[j] += w * src[j];
        }
    }
    return out;
}

Matrix SignTensor::block(std::size_t k) const {
    const auto f = source_feature_dim;
    Matrix out(z.rows(), f);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        auto src = z.row(r).subspan(k * f, f);
        std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
}

SignTensor sign_features(const SparseMatrix& a_tilde, const Matrix& x, std::size_t hops) {
    if (x.rows() != a_tilde.n) {
        throw ShapeError("sign_features: features have " + std::to_string(x.rows()) +
                         " rows but the graph has " + std::to_string(a_tilde.n) + " nodes");
    }
    const auto n = x.rows();
    const auto f = x.cols();
    SignTensor t;
    t.hops = hops;
    t.source_feature_dim = f;
    t.z = Matrix(n, (hops + 1) * f);
    Matrix current = x;
    for (std::size_t k = 0;; ++k) {
        for (std::size_t r = 0; r < n; ++r) {
            auto src = current.row(r);
            std::copy(src.begin(), src.end(), t.z.row(r).begin() + static_cast<std::ptrdiff_t>(k * f));
        }
        if (k == hops) break;
        current = spmm(a_tilde, current);
    }
    return t;
}

void write_sign_binary(std::ostream& out, const SignTensor& t) {
    out.write(kMagic, sizeof kMagic);
    write_u64(out, t.z.rows());
    write_u64(out, t.source_feature_dim);
    write_u64(out, t.hops);
    auto data = t.z.data();
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
}

SignTensor read_sign_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw CorruptionError("not a SIGN tensor file (bad magic)");
    }
    const auto n = read_u64(in);
    const auto f = read_u64(in);
    const auto hops = read_u64(in);
    const std::uint64_t width = (hops + 1) * f;
    if (f != 0 && (hops + 1 > (std::uint64_t{1} << 40) / f || n > (std::uint64_t{1} << 40) / width)) {
        throw CorruptionError("SIGN header declares an implausible size");
    }
    SignTensor t;
    t.hops = hops;
    t.source_feature_dim = f;
    std::vector<double> data(n * width);
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 8))) {
        throw CorruptionError("SIGN payload shorter than its header declares");
    }
    t.z = Matrix(n, width, std::move(data));
    return t;
}

void write_sign_binary_file(const std::string& path, const SignTensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_sign_binary(out, t);
}

SignTensor read_sign_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_sign_binary(in);
}

void write_sign_csv(std::ostream& out, const SignTensor& t) {
    out << "node_id";
    for (std::size_t k = 0; k <= t.hops; ++k) {
        for (std::size_t j = 0; j < t.source_feature_dim; ++j) out << ",h" << k << "_f" << j;
    }
    out << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t r = 0; r < t.z.rows(); ++r) {
        out << r;
        for (double v : t.z.row(r)) out << ',' << v;
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace gck
