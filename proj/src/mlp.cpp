#include "gck/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "gck/error.hpp"
#include "gck/log.hpp"
#include "gck/metrics.hpp"

namespace gck {

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// out = a * w + bias (a: n x in, w: in x out).
Matrix affine(const Matrix& a, const DenseLayer& layer) {
    const auto n = a.rows();
    const auto in = a.cols();
    const auto out_dim = layer.weight.cols();
    Matrix out(n, out_dim);
    const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < sn; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        auto dst = out.row(i);
        std::copy(layer.bias.begin(), layer.bias.end(), dst.begin());
        auto src = a.row(i);
        for (std::size_t k = 0; k < in; ++k) {
            const double v = src[k];
            if (v == 0.0) continue;
            auto w = layer.weight.row(k);
            for (std::size_t j = 0; j < out_dim; ++j) dst[j] += v * w[j];
        }
    }
    return out;
}

// grad_w = a^T * delta, grad_b = column sums of delta.
void weight_gradients(const Matrix& a, const Matrix& delta, Matrix& grad_w, std::vector<double>& grad_b) {
    const auto in = a.cols();
    const auto out_dim = delta.cols();
    grad_w = Matrix(in, out_dim);
    grad_b.assign(out_dim, 0.0);
    const auto sin = static_cast<std::int64_t>(in);
#pragma omp parallel for schedule(static)
    for (std::int64_t kk = 0; kk < sin; ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        auto dst = grad_w.row(k);
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const double v = a(i, k);
            if (v == 0.0) continue;
            auto d = delta.row(i);
            for (std::size_t j = 0; j < out_dim; ++j) dst[j] += v * d[j];
        }
    }
    for (std::size_t i = 0; i < delta.rows(); ++i) {
        auto d = delta.row(i);
        for (std::size_t j = 0; j < out_dim; ++j) grad_b[j] += d[j];
    }
}

// delta * w^T
Matrix backprop_delta(const Matrix& delta, const Matrix& w) {
    const auto n = delta.rows();
    Matrix out(n, w.rows());
    const auto sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < sn; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        auto d = delta.row(i);
        auto dst = out.row(i);
        for (std::size_t k = 0; k < w.rows(); ++k) {
            auto wr = w.row(k);
            double s = 0.0;
            for (std::size_t j = 0; j < d.size(); ++j) s += d[j] * wr[j];
            dst[k] = s;
        }
    }
    return out;
}

double stable_log_sigmoid_loss(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

// Loss and d(loss)/d(logits).
double loss_and_delta(const Matrix& logits, const Matrix& targets, TaskKind kind, Matrix* delta) {
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
        throw ShapeError("logits and targets differ in shape");
    }
    const auto n = logits.rows();
    const auto l = logits.cols();
    if (n == 0) return 0.0;
    if (delta) *delta = Matrix(n, l);
    double total = 0.0;
    if (kind == TaskKind::MultiClass) {
        std::vector<double> p(l);
        for (std::size_t i = 0; i < n; ++i) {
            auto z = logits.row(i);
            auto y = targets.row(i);
            const double zmax = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (std::size_t j = 0; j < l; ++j) sum += std::exp(z[j] - zmax);
            const double log_sum = std::log(sum) + zmax;
            for (std::size_t j = 0; j < l; ++j) {
                total -= y[j] * (z[j] - log_sum);
                p[j] = std::exp(z[j] - log_sum);
            }
            if (delta) {
                auto d = delta->row(i);
                for (std::size_t j = 0; j < l; ++j) d[j] = (p[j] - y[j]) / static_cast<double>(n);
            }
        }
        return total / static_cast<double>(n);
    }
    const double scale = 1.0 / static_cast<double>(n * l);
    for (std::size_t i = 0; i < n; ++i) {
        auto z = logits.row(i);
        auto y = targets.row(i);
        for (std::size_t j = 0; j < l; ++j) {
            total += stable_log_sigmoid_loss(z[j], y[j]);
            if (delta) (*delta)(i, j) = (1.0 / (1.0 + std::exp(-z[j])) - y[j]) * scale;
        }
    }
    return total * scale;
}

struct OptimizerState {
    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    std::size_t step = 0;
};

void apply_update(double& param, double grad, double& m, double& v, const MlpConfig& cfg, double bias1,
                  double bias2) {
    switch (cfg.optimizer) {
        case Optimizer::Sgd: param -= cfg.learning_rate * grad; break;
        case Optimizer::Momentum:
            m = cfg.momentum * m + grad;
            param -= cfg.learning_rate * m;
            break;
        case Optimizer::Adam:
            m = 0.9 * m + 0.1 * grad;
            v = 0.999 * v + 0.001 * grad * grad;
            param -= cfg.learning_rate * (m / bias1) / (std::sqrt(v / bias2) + 1e-8);
            break;
    }
}

void update(Mlp& model, const Gradients& g, OptimizerState& st, const MlpConfig& cfg) {
    auto& layers = model.layers();
    if (st.m_w.empty()) {
        for (const auto& layer : layers) {
            st.m_w.emplace_back(layer.weight.rows(), layer.weight.cols());
            st.v_w.emplace_back(layer.weight.rows(), layer.weight.cols());
            st.m_b.emplace_back(layer.bias.size(), 0.0);
            st.v_b.emplace_back(layer.bias.size(), 0.0);
        }
    }
    ++st.step;
    const double bias1 = 1.0 - std::pow(0.9, static_cast<double>(st.step));
    const double bias2 = 1.0 - std::pow(0.999, static_cast<double>(st.step));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto w = layers[l].weight.data();
        auto gw = g.weight[l].data();
        auto mw = st.m_w[l].data();
        auto vw = st.v_w[l].data();
        for (std::size_t i = 0; i < w.size(); ++i) apply_update(w[i], gw[i], mw[i], vw[i], cfg, bias1, bias2);
        auto& b = layers[l].bias;
        for (std::size_t i = 0; i < b.size(); ++i) {
            apply_update(b[i], g.bias[l][i], st.m_b[l][i], st.v_b[l][i], cfg, bias1, bias2);
        }
    }
}

void write_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), 8)) throw CorruptionError("truncated checkpoint");
    return v;
}

}  // namespace

void MlpConfig::validate() const {
    if (layer_sizes.size() < 3) throw ParameterError("MLP needs input, at least one hidden, and output sizes");
    for (auto s : layer_sizes) {
        if (s == 0) throw ParameterError("MLP layer sizes must be positive");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ParameterError("dropout must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
    if (batches_per_epoch == 0) throw ParameterError("batches_per_epoch must be positive");
    if (quant_bits < 1 || quant_bits > 8) throw ParameterError("quantization bits must be in 1..8");
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        DenseLayer layer{Matrix(sizes_[l], sizes_[l + 1]), std::vector<double>(sizes_[l + 1], 0.0)};
        const double bound = std::sqrt(6.0 / static_cast<double>(sizes_[l]));
        for (double& w : layer.weight.data()) w = (2.0 * unit_uniform(rng) - 1.0) * bound;
        layers_.push_back(std::move(layer));
    }
}

Matrix Mlp::forward(const Matrix& x) const {
    if (layers_.empty()) throw ParameterError("forward on an empty model");
    if (x.cols() != sizes_.front()) {
        throw ShapeError("model expects " + std::to_string(sizes_.front()) + " inputs, got " +
                         std::to_string(x.cols()));
    }
    Matrix a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        a = affine(a, layers_[l]);
        if (l + 1 < layers_.size()) {
            for (double& v : a.data()) v = std::max(v, 0.0);
        }
    }
    return a;
}

double loss(const Matrix& logits, const Matrix& targets, TaskKind kind) {
    return loss_and_delta(logits, targets, kind, nullptr);
}

double loss_and_gradients(const Mlp& model, const Matrix& x, const Matrix& targets, TaskKind kind,
                          const ForwardOptions& options, Gradients& grads) {
    const auto& layers = model.layers();
    const auto depth = layers.size();
    if (options.dropout > 0.0 && options.rng == nullptr) {
        throw ParameterError("dropout needs a random engine");
    }
    // Layer inputs as seen by the backward pass, and the combined ReLU/dropout
    // multiplier applied to each hidden output.
    std::vector<Matrix> saved(depth);
    std::vector<Matrix> gate(depth);
    saved[0] = x;
    Matrix a = x;
    for (std::size_t l = 0; l < depth; ++l) {
        Matrix z = affine(a, layers[l]);
        if (l + 1 == depth) {
            a = std::move(z);
            break;
        }
        Matrix mult(z.rows(), z.cols());
        const double keep_scale = 1.0 / (1.0 - options.dropout);
        auto zd = z.data();
        auto md = mult.data();
        for (std::size_t i = 0; i < zd.size(); ++i) {
            double m = zd[i] > 0.0 ? 1.0 : 0.0;
            if (options.dropout > 0.0) m *= unit_uniform(*options.rng) < options.dropout ? 0.0 : keep_scale;
            md[i] = m;
            zd[i] *= m;
        }
        gate[l] = std::move(mult);
        a = std::move(z);
        saved[l + 1] = options.quantize ? dequantize(quantize(a, *options.quantize)) : a;
    }

    Matrix delta;
    const double value = loss_and_delta(a, targets, kind, &delta);
    grads.weight.assign(depth, Matrix());
    grads.bias.assign(depth, {});
    for (std::size_t l = depth; l-- > 0;) {
        weight_gradients(saved[l], delta, grads.weight[l], grads.bias[l]);
        if (l == 0) break;
        Matrix prev = backprop_delta(delta, layers[l].weight);
        auto pd = prev.data();
        auto gd = gate[l - 1].data();
        for (std::size_t i = 0; i < pd.size(); ++i) pd[i] *= gd[i];
        delta = std::move(prev);
    }
    return value;
}

TrainResult train_mlp(const Matrix& z, const Matrix& y, std::span<const std::size_t> train_rows,
                      std::span<const std::size_t> val_rows, const MlpConfig& cfg) {
    cfg.validate();
    if (cfg.layer_sizes.front() != z.cols() || cfg.layer_sizes.back() != y.cols()) {
        throw ShapeError("MLP sizes do not match the data (" + std::to_string(z.cols()) + " inputs, " +
                         std::to_string(y.cols()) + " outputs)");
    }
    if (z.rows() != y.rows()) throw ShapeError("feature and label row counts differ");
    for (double v : z.data()) {
        if (!std::isfinite(v)) throw DataError("training inputs contain NaN or Inf");
    }
    TrainResult result;
    Mlp model(cfg.layer_sizes, cfg.seed);
    std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66Dull);
    QuantizeOptions qopts;
    qopts.bits = cfg.quant_bits;
    ForwardOptions fopts{cfg.dropout, &rng, cfg.quantize_activations ? &qopts : nullptr};

    const Matrix z_val = z.select_rows(val_rows);
    const Matrix y_val = y.select_rows(val_rows);
    auto val_accuracy = [&](const Mlp& m) {
        if (val_rows.empty()) return 0.0;
        return metrics_from_logits(m.forward(z_val), y_val, cfg.task_kind).accuracy;
    };

    result.model = model;
    result.best_val_accuracy = val_accuracy(model);
    std::vector<std::size_t> order(train_rows.begin(), train_rows.end());
    OptimizerState state;
    Gradients grads;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(i));
            std::swap(order[i - 1], order[std::min(j, i - 1)]);
        }
        const std::size_t batches = std::min(cfg.batches_per_epoch, std::max<std::size_t>(order.size(), 1));
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches && !order.empty(); ++b) {
            const auto begin = b * order.size() / batches;
            const auto end = (b + 1) * order.size() / batches;
            std::span<const std::size_t> rows(order.data() + begin, end - begin);
            const Matrix xb = z.select_rows(rows);
            const Matrix yb = y.select_rows(rows);
            const double batch_loss = loss_and_gradients(model, xb, yb, cfg.task_kind, fopts, grads);
            if (!std::isfinite(batch_loss)) {
                throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(b) + " (loss " + std::to_string(batch_loss) +
                                      ", learning rate " + std::to_string(cfg.learning_rate) + ")");
            }
            update(model, grads, state, cfg);
            epoch_loss += batch_loss * static_cast<double>(rows.size());
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size());
        rec.val_accuracy = val_accuracy(model);
        result.history.push_back(rec);
        if (val_rows.empty() || rec.val_accuracy > result.best_val_accuracy) {
            result.best_val_accuracy = rec.val_accuracy;
            result.best_epoch = epoch;
            result.model = model;
        }
        spdlog::debug("epoch {}: loss {:.6f}, val accuracy {:.4f}", epoch, rec.train_loss, rec.val_accuracy);
    }
    return result;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
    out << "epoch,train_loss,val_accuracy\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.val_accuracy << '\n';
    out.precision(old_precision);
}

void save_checkpoint(std::ostream& out, const Mlp& model) {
    static_assert(std::endian::native == std::endian::little, "checkpoint format is little-endian");
    const auto& sizes = model.layer_sizes();
    write_u64(out, sizes.size());
    for (auto s : sizes) write_u64(out, s);
    for (const auto& layer : model.layers()) {
        auto w = layer.weight.data();
        out.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(w.size_bytes()));
        out.write(reinterpret_cast<const char*>(layer.bias.data()),
                  static_cast<std::streamsize>(layer.bias.size() * sizeof(double)));
    }
}

Mlp load_checkpoint(std::istream& in) {
    const auto count = read_u64(in);
    if (count < 2 || count > 1024) throw CorruptionError("checkpoint declares an implausible layer count");
    std::vector<std::size_t> sizes(count);
    for (auto& s : sizes) {
        s = read_u64(in);
        if (s == 0 || s > (std::size_t{1} << 24)) throw CorruptionError("checkpoint declares a bad layer size");
    }
    Mlp model(sizes, 0);
    for (auto& layer : model.layers()) {
        auto w = layer.weight.data();
        if (!in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(w.size_bytes())) ||
            !in.read(reinterpret_cast<char*>(layer.bias.data()),
                     static_cast<std::streamsize>(layer.bias.size() * sizeof(double)))) {
            throw CorruptionError("checkpoint payload is truncated");
        }
    }
    return model;
}

}  // namespace gck
