#include "gck/dataset.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string_view>

#include "gck/error.hpp"

namespace gck {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view field, const std::string& source, std::size_t line_no, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(source, line_no, std::string("bad ") + what + " '" + std::string(field) + "'");
    }
    return value;
}

bool skippable(const std::string& line) {
    auto first = line.find_first_not_of(" \t\r");
    return first == std::string::npos || line[first] == '#';
}

// Reads the header, then yields (line number, fields) for each data row.
struct CsvReader {
    std::istream& in;
    std::string source;
    std::size_t line_no = 0;
    std::string line;

    std::vector<std::string_view> header() {
        while (std::getline(in, line)) {
            ++line_no;
            if (!skippable(line)) return split_csv(line);
        }
        throw ParseError(source, line_no, "missing header line");
    }

    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in, line)) {
            ++line_no;
            if (skippable(line)) continue;
            fields = split_csv(line);
            return true;
        }
        return false;
    }
};

void expect_node_id(std::string_view field, std::size_t expected, const std::string& source, std::size_t line_no) {
    const auto id = parse_number<std::size_t>(field, source, line_no, "node id");
    if (id != expected) {
        throw ParseError(source, line_no,
                         "expected node_id " + std::to_string(expected) + ", found " + std::to_string(id));
    }
}

std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + " file '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    return out;
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - unit_uniform(rng);
    const double u2 = unit_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace

Matrix read_features_csv(std::istream& in, const std::string& source_name) {
    CsvReader reader{in, source_name, 0, {}};
    auto header = reader.header();
    if (header.empty() || header[0] != "node_id" || header.size() < 2) {
        throw ParseError(source_name, reader.line_no, "features header must be 'node_id,<feature>...'");
    }
    const auto width = header.size() - 1;
    std::vector<double> data;
    std::size_t rows = 0;
    std::vector<std::string_view> fields;
    while (reader.next(fields)) {
        if (fields.size() != width + 1) {
            throw ParseError(source_name, reader.line_no,
                             "expected " + std::to_string(width + 1) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        expect_node_id(fields[0], rows, source_name, reader.line_no);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const double v = parse_number<double>(fields[j], source_name, reader.line_no, "feature value");
            if (!std::isfinite(v)) throw ParseError(source_name, reader.line_no, "non-finite feature value");
            data.push_back(v);
        }
        ++rows;
    }
    return Matrix(rows, width, std::move(data));
}

LabelTable read_labels_csv(std::istream& in, const std::string& source_name) {
    CsvReader reader{in, source_name, 0, {}};
    auto header = reader.header();
    if (header.size() < 2 || header[0] != "node_id") {
        throw ParseError(source_name, reader.line_no, "labels header must start with 'node_id'");
    }
    LabelTable table;
    std::vector<std::string_view> fields;
    std::size_t rows = 0;
    if (header.size() == 2 && header[1] == "label") {
        table.task_kind = TaskKind::MultiClass;
        std::vector<std::size_t> classes;
        while (reader.next(fields)) {
            if (fields.size() != 2) throw ParseError(source_name, reader.line_no, "expected 'node_id,label'");
            expect_node_id(fields[0], rows, source_name, reader.line_no);
            classes.push_back(parse_number<std::size_t>(fields[1], source_name, reader.line_no, "class index"));
            if (classes.back() > (std::size_t{1} << 20)) {
                throw ParseError(source_name, reader.line_no, "class index implausibly large");
            }
            ++rows;
        }
        const std::size_t num_classes =
            classes.empty() ? 0 : *std::max_element(classes.begin(), classes.end()) + 1;
        table.labels = one_hot(classes, num_classes);
        return table;
    }
    table.task_kind = TaskKind::MultiLabel;
    const auto width = header.size() - 1;
    std::vector<double> data;
    while (reader.next(fields)) {
        if (fields.size() != width + 1) {
            throw ParseError(source_name, reader.line_no,
                             "expected " + std::to_string(width + 1) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        expect_node_id(fields[0], rows, source_name, reader.line_no);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const auto v = parse_number<int>(fields[j], source_name, reader.line_no, "label flag");
            if (v != 0 && v != 1) throw ParseError(source_name, reader.line_no, "label flags must be 0 or 1");
            data.push_back(v);
        }
        ++rows;
    }
    table.labels = Matrix(rows, width, std::move(data));
    return table;
}

std::vector<Split> read_masks_csv(std::istream& in, std::size_t num_nodes, const std::string& source_name) {
    CsvReader reader{in, source_name, 0, {}};
    auto header = reader.header();
    if (header.size() != 2 || header[0] != "node_id" || header[1] != "split") {
        throw ParseError(source_name, reader.line_no, "masks header must be 'node_id,split'");
    }
    std::vector<Split> split(num_nodes, Split::None);
    std::vector<std::string_view> fields;
    while (reader.next(fields)) {
        if (fields.size() != 2) throw ParseError(source_name, reader.line_no, "expected 'node_id,split'");
        const auto id = parse_number<std::size_t>(fields[0], source_name, reader.line_no, "node id");
        if (id >= num_nodes) {
            throw ParseError(source_name, reader.line_no,
                             "node " + std::to_string(id) + " outside [0, " + std::to_string(num_nodes) + ")");
        }
        Split s;
        if (fields[1] == "train") s = Split::Train;
        else if (fields[1] == "val") s = Split::Val;
        else if (fields[1] == "test") s = Split::Test;
        else throw ParseError(source_name, reader.line_no, "unknown split '" + std::string(fields[1]) + "'");
        if (split[id] != Split::None) {
            throw ParseError(source_name, reader.line_no,
                             "mask overlap: node " + std::to_string(id) + " assigned to more than one split");
        }
        split[id] = s;
    }
    return split;
}

void write_features_csv(std::ostream& out, const Matrix& features) {
    out << "node_id";
    for (std::size_t j = 0; j < features.cols(); ++j) out << ",f" << j;
    out << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        out << i;
        for (double v : features.row(i)) out << ',' << v;
        out << '\n';
    }
    out.precision(old_precision);
}

void write_labels_csv(std::ostream& out, const Matrix& labels, TaskKind kind) {
    if (kind == TaskKind::MultiClass) {
        out << "node_id,label\n";
        for (std::size_t i = 0; i < labels.rows(); ++i) {
            auto row = labels.row(i);
            out << i << ',' << (std::max_element(row.begin(), row.end()) - row.begin()) << '\n';
        }
        return;
    }
    out << "node_id";
    for (std::size_t j = 0; j < labels.cols(); ++j) out << ",l" << j;
    out << '\n';
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        out << i;
        for (double v : labels.row(i)) out << ',' << (v >= 0.5 ? 1 : 0);
        out << '\n';
    }
}

void write_masks_csv(std::ostream& out, const std::vector<Split>& split) {
    out << "node_id,split\n";
    for (std::size_t i = 0; i < split.size(); ++i) {
        switch (split[i]) {
            case Split::Train: out << i << ",train\n"; break;
            case Split::Val: out << i << ",val\n"; break;
            case Split::Test: out << i << ",test\n"; break;
            case Split::None: break;
        }
    }
}

Dataset load_dataset(const DatasetPaths& paths) {
    Dataset d;
    {
        auto in = open_input(paths.features, "features");
        d.attrs.features = read_features_csv(in, paths.features);
    }
    const auto n = d.attrs.features.rows();
    {
        auto in = open_input(paths.labels, "labels");
        auto table = read_labels_csv(in, paths.labels);
        if (table.labels.rows() != n) {
            throw ShapeError("labels file has " + std::to_string(table.labels.rows()) +
                             " rows but features file has " + std::to_string(n));
        }
        d.attrs.labels = std::move(table.labels);
        d.attrs.task_kind = table.task_kind;
    }
    {
        auto in = open_input(paths.masks, "masks");
        d.attrs.split = read_masks_csv(in, n, paths.masks);
    }
    auto edges = read_edge_list_file(paths.edges);
    if (edges.num_nodes > n) {
        throw ShapeError("edge list has " + std::to_string(edges.num_nodes) + " nodes but features file has " +
                         std::to_string(n) + " rows");
    }
    d.graph = Graph::from_edges(edges.edges, n);
    d.attrs.validate();
    return d;
}

void save_dataset(const DatasetPaths& paths, const Dataset& data) {
    write_edge_list_file(paths.edges, data.graph);
    {
        auto out = open_output(paths.features);
        write_features_csv(out, data.attrs.features);
    }
    {
        auto out = open_output(paths.labels);
        write_labels_csv(out, data.attrs.labels, data.attrs.task_kind);
    }
    {
        auto out = open_output(paths.masks);
        write_masks_csv(out, data.attrs.split);
    }
}

DatasetPaths dataset_paths_in(const std::string& dir, const std::string& stem) {
    const std::filesystem::path base(dir);
    return {(base / (stem + "_edges.txt")).string(), (base / (stem + "_features.csv")).string(),
            (base / (stem + "_labels.csv")).string(), (base / (stem + "_masks.csv")).string()};
}

Dataset generate_sbm(const SbmParams& p) {
    if (p.num_blocks == 0 || p.num_nodes < p.num_blocks) {
        throw ParameterError("SBM needs at least one node per block");
    }
    if (p.train_fraction < 0.0 || p.val_fraction < 0.0 || p.train_fraction + p.val_fraction > 1.0) {
        throw ParameterError("SBM split fractions must be non-negative and sum to at most 1");
    }
    std::mt19937_64 rng(p.seed);
    const auto n = p.num_nodes;
    std::vector<std::size_t> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = i * p.num_blocks / n;

    std::vector<Edge> edges;
    const auto weak = static_cast<std::size_t>(p.weak_block);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double prob = block[i] == block[j] ? p.p_in : p.p_out;
            if (p.weak_block >= 0 && (block[i] == weak || block[j] == weak)) prob *= p.weak_factor;
            if (unit_uniform(rng) < prob) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        }
    }

    Matrix means(p.num_blocks, p.feature_dim);
    for (double& m : means.data()) m = p.mean_separation * standard_normal(rng);
    Dataset d;
    d.graph = Graph::from_edges(edges, n);
    d.attrs.features = Matrix(n, p.feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p.feature_dim; ++j) {
            d.attrs.features(i, j) = means(block[i], j) + p.feature_noise * standard_normal(rng);
        }
    }
    d.attrs.labels = one_hot(block, p.num_blocks);
    d.attrs.task_kind = TaskKind::MultiClass;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = std::min(i - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i)));
        std::swap(perm[i - 1], perm[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(p.train_fraction * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(p.val_fraction * static_cast<double>(n)));
    d.attrs.split.assign(n, Split::Test);
    for (std::size_t k = 0; k < n; ++k) {
        if (k < n_train) d.attrs.split[perm[k]] = Split::Train;
        else if (k < n_train + n_val) d.attrs.split[perm[k]] = Split::Val;
    }
    return d;
}

}  // namespace gck
