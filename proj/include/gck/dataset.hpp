#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gck/attributes.hpp"
#include "gck/graph.hpp"

namespace gck {

struct DatasetPaths {
    std::string edges;
    std::string features;
    std::string labels;
    std::string masks;
};

struct Dataset {
    Graph graph;
    AttributeSet attrs;
};

// Features: header "node_id,<name>..." then one row per node in id order.
// Labels: header "node_id,label" with a class index per row (multi-class), or
// "node_id,<name>..." with 0/1 columns (multi-label).
// Masks: header "node_id,split", split in {train, val, test}; unlisted nodes
// belong to no split.
Matrix read_features_csv(std::istream& in, const std::string& source_name);
struct LabelTable {
    Matrix labels;
    TaskKind task_kind = TaskKind::MultiClass;
};
LabelTable read_labels_csv(std::istream& in, const std::string& source_name);
std::vector<Split> read_masks_csv(std::istream& in, std::size_t num_nodes,
                                  const std::string& source_name);

void write_features_csv(std::ostream& out, const Matrix& features);
void write_labels_csv(std::ostream& out, const Matrix& labels, TaskKind kind);
void write_masks_csv(std::ostream& out, const std::vector<Split>& split);

// Parses and cross-validates all four files. Row-count mismatches name both
// counts; overlapping masks and malformed labels raise DataError.
Dataset load_dataset(const DatasetPaths& paths);
void save_dataset(const DatasetPaths& paths, const Dataset& data);

// Paths "<dir>/<stem>_{edges.txt,features.csv,labels.csv,masks.csv}".
DatasetPaths dataset_paths_in(const std::string& dir, const std::string& stem);

// Planted-partition graph with one label per block and Gaussian features
// around a per-label mean. The `weak_block` gets its edge probabilities
// multiplied by `weak_factor`, which makes its nodes low-centrality.
struct SbmParams {
    std::size_t num_nodes = 2000;
    std::size_t num_blocks = 4;
    double p_in = 0.02;
    double p_out = 0.002;
    int weak_block = -1;  // -1: none
    double weak_factor = 0.25;
    std::size_t feature_dim = 16;
    double mean_separation = 1.0;
    double feature_noise = 1.0;
    double train_fraction = 0.5;
    double val_fraction = 0.25;
    std::uint64_t seed = 0;
};

Dataset generate_sbm(const SbmParams& params);

}  // namespace gck
