#include "gck/attributes.hpp"

#include <cmath>

#include "gck/error.hpp"

namespace gck {

std::string_view to_string(TaskKind kind) {
    return kind == TaskKind::MultiClass ? "multi-class" : "multi-label";
}

TaskKind task_kind_from_string(std::string_view s) {
    if (s == "multi-class" || s == "multiclass") return TaskKind::MultiClass;
    if (s == "multi-label" || s == "multilabel") return TaskKind::MultiLabel;
    throw ParameterError("unknown task kind '" + std::string(s) + "'");
}

std::vector<NodeId> AttributeSet::nodes_in(Split s) const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < split.size(); ++v) {
        if (split[v] == s) out.push_back(v);
    }
    return out;
}

void AttributeSet::validate() const {
    const auto n = features.rows();
    if (labels.rows() != n) {
        throw ShapeError("labels have " + std::to_string(labels.rows()) + " rows but features have " +
                         std::to_string(n));
    }
    if (split.size() != n) {
        throw ShapeError("split covers " + std::to_string(split.size()) + " nodes but features have " +
                         std::to_string(n));
    }
    for (double x : features.data()) {
        if (!std::isfinite(x)) throw DataError("features contain a non-finite value");
    }
    for (std::size_t r = 0; r < n; ++r) {
        double sum = 0.0;
        for (double y : labels.row(r)) {
            if (y != 0.0 && y != 1.0) {
                throw DataError("label entries must be 0 or 1 (row " + std::to_string(r) + ")");
            }
            sum += y;
        }
        if (task_kind == TaskKind::MultiClass && sum != 1.0) {
            throw DataError("multi-class label row " + std::to_string(r) + " is not one-hot");
        }
    }
}

AttributeSet AttributeSet::select(std::span<const NodeId> nodes) const {
    std::vector<std::size_t> rows(nodes.begin(), nodes.end());
    AttributeSet out;
    out.features = features.select_rows(rows);
    out.labels = labels.select_rows(rows);
    out.split.reserve(nodes.size());
    for (NodeId v : nodes) out.split.push_back(split[v]);
    out.task_kind = task_kind;
    return out;
}

Matrix one_hot(std::span<const std::size_t> classes, std::size_t num_classes) {
    Matrix out(classes.size(), num_classes);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] >= num_classes) {
            throw IndexError("class " + std::to_string(classes[i]) + " outside [0, " +
                             std::to_string(num_classes) + ")");
        }
        out(i, classes[i]) = 1.0;
    }
    return out;
}

TrainingSubgraph training_subgraph(const Graph& g, const AttributeSet& attrs) {
    if (attrs.num_nodes() != g.num_nodes()) {
        throw ShapeError("graph has " + std::to_string(g.num_nodes()) + " nodes but attributes have " +
                         std::to_string(attrs.num_nodes()));
    }
    auto train = attrs.nodes_in(Split::Train);
    if (train.empty()) throw EmptyInputError("training set is empty");
    TrainingSubgraph out;
    out.graph = induced_subgraph(g, train);
    out.attrs = attrs.select(train);
    out.original_id = std::move(train);
    return out;
}

}  // namespace gck
