#pragma once

#include <cstddef>
#include <span>

#include "gck/attributes.hpp"
#include "gck/matrix.hpp"

namespace gck {

class Mlp;

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MetricsReport {
    double accuracy = 0.0;
    double micro_f1 = 0.0;
    double micro_sensitivity = 0.0;
    double micro_specificity = 0.0;
    TaskKind task_kind = TaskKind::MultiClass;
    Confusion confusion;
};

// Pooled over every (sample, label) pair. Multi-class predictions are the
// argmax; multi-label predictions threshold the sigmoid at 0.5.
MetricsReport metrics_from_logits(const Matrix& logits, const Matrix& targets, TaskKind kind);
MetricsReport metrics_from_confusion(const Confusion& c, TaskKind kind);

// Throws EmptyInputError for an empty row set.
MetricsReport evaluate(const Mlp& model, const Matrix& z, const Matrix& y,
                       std::span<const std::size_t> rows, TaskKind kind);

// Mean over labels of |n_l/n - N_l/N|, where n_l counts rows with label l set.
// Throws EmptyInputError if either side has no rows, ShapeError if widths differ.
double label_distribution_error(const Matrix& original, const Matrix& collapsed);

}  // namespace gck
