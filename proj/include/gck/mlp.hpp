#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gck/attributes.hpp"
#include "gck/matrix.hpp"
#include "gck/quantizer.hpp"

namespace gck {

enum class Optimizer { Sgd, Momentum, Adam };

struct MlpConfig {
    std::vector<std::size_t> layer_sizes;  // input, hidden..., output
    double dropout = 0.0;
    double learning_rate = 0.01;
    Optimizer optimizer = Optimizer::Sgd;
    double momentum = 0.9;
    std::size_t batches_per_epoch = 1;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;
    bool quantize_activations = false;
    unsigned quant_bits = 2;
    TaskKind task_kind = TaskKind::MultiClass;

    // Throws ParameterError on fewer than one hidden layer or bad ranges.
    void validate() const;
};

struct DenseLayer {
    Matrix weight;  // in x out
    std::vector<double> bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// ReLU MLP producing logits.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    Matrix forward(const Matrix& x) const;

    friend bool operator==(const Mlp&, const Mlp&) = default;

private:
    std::vector<std::size_t> sizes_;
    std::vector<DenseLayer> layers_;
};

// Mean loss of logits against 0/1 targets: softmax cross-entropy for
// multi-class, sigmoid binary cross-entropy averaged over labels otherwise.
double loss(const Matrix& logits, const Matrix& targets, TaskKind kind);

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<std::vector<double>> bias;
};

struct ForwardOptions {
    double dropout = 0.0;
    std::mt19937_64* rng = nullptr;  // required when dropout > 0
    const QuantizeOptions* quantize = nullptr;
};

// One forward/backward pass on a batch. Returns the batch loss.
double loss_and_gradients(const Mlp& model, const Matrix& x, const Matrix& targets, TaskKind kind,
                          const ForwardOptions& options, Gradients& grads);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    Mlp model;  // best validation accuracy
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_accuracy = 0.0;
};

// Rows of z/y are samples; train_rows and val_rows index them. Throws
// DivergenceError if the loss becomes non-finite.
TrainResult train_mlp(const Matrix& z, const Matrix& y, std::span<const std::size_t> train_rows,
                      std::span<const std::size_t> val_rows, const MlpConfig& cfg);

// "epoch,train_loss,val_accuracy"
void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

// Little-endian: u64 layer count, u64 sizes, then per layer the row-major
// in x out weights followed by the out biases, all float64.
void save_checkpoint(std::ostream& out, const Mlp& model);
Mlp load_checkpoint(std::istream& in);

}  // namespace gck
