#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gck/centrality.hpp"
#include "gck/dataset.hpp"
#include "gck/metrics.hpp"
#include "gck/mlp.hpp"

namespace gck {

struct PipelineConfig {
    DatasetPaths paths;
    std::optional<std::size_t> psi;          // absolute budget; default all training nodes
    std::optional<double> psi_fraction;      // of training nodes, used when psi is unset
    std::size_t eta = 100;
    double gamma = 0.5;
    Measure zeta = Measure::Eigenvector;
    std::optional<std::size_t> bc_sample_size;
    double damping = 0.85;
    double tol = 1e-8;
    std::size_t max_iter = 1000;
    std::size_t hops = 2;
    std::vector<std::size_t> hidden = {64};
    double dropout = 0.2;
    double learning_rate = 0.01;
    Optimizer optimizer = Optimizer::Adam;  // plain SGD undertrains at 100 epochs
    std::size_t batches_per_epoch = 4;
    std::size_t epochs = 100;
    bool quantize = true;
    unsigned bits = 2;
    std::uint64_t seed = 0;
    std::string out_dir;  // empty: no artifacts
    std::optional<double> timeout_secs;
};

struct PipelineReport {
    std::size_t training_nodes = 0;
    std::size_t psi = 0;
    std::size_t survivor_count = 0;
    std::vector<std::size_t> per_cluster_budget;
    double l_err = 0.0;
    MetricsReport val;
    MetricsReport test;
    double best_val_accuracy = 0.0;
    std::size_t best_epoch = 0;
    nlohmann::json manifest;
};

// Training subgraph -> centrality -> clustering -> collapse -> normalized
// adjacency -> hop features -> MLP -> evaluation. Validation and test rows
// are aggregated over the full graph; training rows over the collapsed one.
// Failures are rethrown as StageError naming the stage.
PipelineReport run_pipeline(const PipelineConfig& cfg, const Dataset& data);
PipelineReport run_pipeline(const PipelineConfig& cfg);

// Manifest without the "runtime" section (timings, memory).
nlohmann::json deterministic_part(const nlohmann::json& manifest);

struct SweepRow {
    double fraction = 0.0;
    std::size_t psi = 0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double l_err = 0.0;
};

// Runs the pipeline once per budget fraction (artifacts disabled).
std::vector<SweepRow> budget_sweep(const PipelineConfig& cfg, const Dataset& data,
                                   const std::vector<double>& fractions);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Peak resident set size of this process in bytes (0 if unavailable).
std::size_t peak_rss_bytes();

}  // namespace gck
