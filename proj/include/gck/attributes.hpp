#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gck/graph.hpp"
#include "gck/matrix.hpp"

namespace gck {

enum class TaskKind { MultiClass, MultiLabel };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view s);

enum class Split : std::uint8_t { None, Train, Val, Test };

// Node features X (|V| x F), labels Y (|V| x L, 0/1 entries) and the split
// each node belongs to. Multi-class labels are stored one-hot.
struct AttributeSet {
    Matrix features;
    Matrix labels;
    std::vector<Split> split;
    TaskKind task_kind = TaskKind::MultiClass;

    std::size_t num_nodes() const { return features.rows(); }
    std::size_t feature_dim() const { return features.cols(); }
    std::size_t label_dim() const { return labels.cols(); }

    std::vector<NodeId> nodes_in(Split s) const;

    // Throws ShapeError / DataError describing the first violated invariant.
    void validate() const;

    // Rows `nodes` in order; node i of the result is nodes[i].
    AttributeSet select(std::span<const NodeId> nodes) const;

    friend bool operator==(const AttributeSet&, const AttributeSet&) = default;
};

// Converts class indices to one-hot rows of width `num_classes`.
Matrix one_hot(std::span<const std::size_t> classes, std::size_t num_classes);

struct TrainingSubgraph {
    Graph graph;
    AttributeSet attrs;
    std::vector<NodeId> original_id;  // compact id -> id in the full graph
};

// Induced subgraph on training nodes with compacted ids. Throws EmptyInputError
// if no node is marked as training.
TrainingSubgraph training_subgraph(const Graph& g, const AttributeSet& attrs);

}  // namespace gck
