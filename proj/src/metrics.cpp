#include "gck/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gck/error.hpp"
#include "gck/mlp.hpp"

namespace gck {

namespace {

// A ratio with nothing to count in its denominator is vacuously perfect.
double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t argmax(std::span<const double> row) {
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

MetricsReport metrics_from_confusion(const Confusion& c, TaskKind kind) {
    MetricsReport r;
    r.task_kind = kind;
    r.confusion = c;
    r.micro_specificity = ratio(c.tn, c.tn + c.fp);
    if (kind == TaskKind::MultiClass) {
        // One prediction per sample: every miss is one FP and one FN.
        r.accuracy = ratio(c.tp, c.tp + c.fn);
        r.micro_f1 = r.accuracy;
        r.micro_sensitivity = r.accuracy;
    } else {
        r.accuracy = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
        r.micro_f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
        r.micro_sensitivity = ratio(c.tp, c.tp + c.fn);
    }
    return r;
}

MetricsReport metrics_from_logits(const Matrix& logits, const Matrix& targets, TaskKind kind) {
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
        throw ShapeError("logits and targets differ in shape");
    }
    Confusion c;
    const auto n = logits.rows();
    const auto l = logits.cols();
    if (kind == TaskKind::MultiClass) {
        for (std::size_t i = 0; i < n; ++i) {
            if (argmax(logits.row(i)) == argmax(targets.row(i))) ++c.tp;
            else {
                ++c.fp;
                ++c.fn;
            }
        }
        c.tn = n * l - c.tp - c.fp - c.fn;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < l; ++j) {
                const bool predicted = logits(i, j) >= 0.0;  // sigmoid >= 0.5
                const bool actual = targets(i, j) >= 0.5;
                if (predicted && actual) ++c.tp;
                else if (predicted) ++c.fp;
                else if (actual) ++c.fn;
                else ++c.tn;
            }
        }
    }
    return metrics_from_confusion(c, kind);
}

MetricsReport evaluate(const Mlp& model, const Matrix& z, const Matrix& y, std::span<const std::size_t> rows,
                       TaskKind kind) {
    if (rows.empty()) throw EmptyInputError("evaluate: empty row set");
    return metrics_from_logits(model.forward(z.select_rows(rows)), y.select_rows(rows), kind);
}

double label_distribution_error(const Matrix& original, const Matrix& collapsed) {
    if (original.rows() == 0) throw EmptyInputError("label distribution error: no original nodes");
    if (collapsed.rows() == 0) throw EmptyInputError("label distribution error: no surviving nodes");
    if (original.cols() != collapsed.cols()) {
        throw ShapeError("label widths differ (" + std::to_string(original.cols()) + " vs " +
                         std::to_string(collapsed.cols()) + ")");
    }
    const auto l = original.cols();
    if (l == 0) return 0.0;
    auto label_ratios = [l](const Matrix& y) {
        std::vector<double> counts(l, 0.0);
        for (std::size_t i = 0; i < y.rows(); ++i) {
            for (std::size_t j = 0; j < l; ++j) {
                if (y(i, j) >= 0.5) counts[j] += 1.0;
            }
        }
        for (double& c : counts) c /= static_cast<double>(y.rows());
        return counts;
    };
    const auto before = label_ratios(original);
    const auto after = label_ratios(collapsed);
    double total = 0.0;
    for (std::size_t j = 0; j < l; ++j) total += std::abs(after[j] - before[j]);
    return total / static_cast<double>(l);
}

}  // namespace gck
