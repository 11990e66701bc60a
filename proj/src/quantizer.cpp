#include "gck/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "gck/error.hpp"

namespace gck {

namespace {

std::size_t effective_group_size(const Matrix& h, std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(h.cols(), 1);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

void quantize_group(std::span<const double> values, unsigned bits, Rounding rounding, std::uint64_t seed,
                    std::span<std::uint8_t> codes, double& zero, double& range) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    zero = *lo;
    range = *hi - *lo;
    if (range == 0.0) {
        std::fill(codes.begin(), codes.end(), std::uint8_t{0});
        return;
    }
    const double levels = static_cast<double>((1u << bits) - 1u);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double scaled = (values[i] - zero) / range * levels;
        const double offset =
            rounding == Rounding::Nearest ? 0.5 : static_cast<double>(rng() >> 11) * 0x1.0p-53;
        codes[i] = static_cast<std::uint8_t>(std::clamp(std::floor(scaled + offset), 0.0, levels));
    }
}

void check_input(const Matrix& h, const QuantizeOptions& options) {
    if (options.bits < 1 || options.bits > 8) throw ParameterError("quantization bits must be in 1..8");
    for (double x : h.data()) {
        if (!std::isfinite(x)) throw DataError("quantize: input contains NaN or Inf");
    }
}

void check_block(const QuantizedBlock& q) {
    if (q.bits < 1 || q.bits > 8) throw CorruptionError("quantized block has invalid bit width");
    if (q.group_size == 0) throw CorruptionError("quantized block has zero group size");
    const auto groups = (q.count() + q.group_size - 1) / q.group_size;
    if (q.zero.size() != groups || q.range.size() != groups) {
        throw CorruptionError("quantized block group metadata does not match its shape");
    }
    if (q.packed.size() != packed_size(q.count(), q.bits)) {
        throw CorruptionError("quantized block payload size does not match its shape");
    }
}

}  // namespace

std::size_t packed_size(std::size_t count, unsigned bits) { return (count * bits + 7) / 8; }

std::uint32_t QuantizedBlock::code(std::size_t i) const {
    const std::size_t bit = i * bits;
    const std::size_t byte = bit / 8;
    std::uint32_t window = packed[byte];
    if (byte + 1 < packed.size()) window |= static_cast<std::uint32_t>(packed[byte + 1]) << 8;
    return (window >> (bit % 8)) & levels();
}

std::size_t QuantizedBlock::storage_bytes() const {
    return packed.size() + (zero.size() + range.size()) * sizeof(double);
}

QuantizedBlock quantize(const Matrix& h, const QuantizeOptions& options) {
    check_input(h, options);
    QuantizedBlock q;
    q.bits = options.bits;
    q.group_size = effective_group_size(h, options.group_size);
    q.rows = h.rows();
    q.cols = h.cols();
    const auto count = q.count();
    const auto groups = (count + q.group_size - 1) / q.group_size;
    q.zero.resize(groups);
    q.range.resize(groups);
    std::vector<std::uint8_t> codes(count);
    auto data = h.data();
    const auto sgroups = static_cast<std::int64_t>(groups);
#pragma omp parallel for schedule(static)
    for (std::int64_t gi = 0; gi < sgroups; ++gi) {
        const auto g = static_cast<std::size_t>(gi);
        const auto begin = g * q.group_size;
        const auto len = std::min(q.group_size, count - begin);
        quantize_group(data.subspan(begin, len), q.bits, options.rounding, splitmix64(options.seed ^ g),
                       std::span(codes).subspan(begin, len), q.zero[g], q.range[g]);
    }

    // Each output byte gathers its own bits, so bytes can be filled independently.
    q.packed.assign(packed_size(count, q.bits), 0);
    const auto bytes = static_cast<std::int64_t>(q.packed.size());
    const std::size_t b = q.bits;
#pragma omp parallel for schedule(static)
    for (std::int64_t bi = 0; bi < bytes; ++bi) {
        const auto byte = static_cast<std::size_t>(bi);
        const std::size_t first_bit = byte * 8;
        const std::size_t first = first_bit / b;
        const std::size_t last = std::min(count, (first_bit + 8 + b - 1) / b);
        std::uint32_t acc = 0;
        for (std::size_t i = first; i < last; ++i) {
            const auto pos = static_cast<std::int64_t>(i * b) - static_cast<std::int64_t>(first_bit);
            const std::uint32_t c = codes[i];
            acc |= pos >= 0 ? (c << pos) : (c >> -pos);
        }
        q.packed[byte] = static_cast<std::uint8_t>(acc & 0xFFu);
    }
    return q;
}

Matrix dequantize(const QuantizedBlock& q) {
    check_block(q);
    Matrix out(q.rows, q.cols);
    auto data = out.data();
    const double levels = static_cast<double>(q.levels());
    const auto groups = static_cast<std::int64_t>(q.num_groups());
#pragma omp parallel for schedule(static)
    for (std::int64_t gi = 0; gi < groups; ++gi) {
        const auto g = static_cast<std::size_t>(gi);
        const auto begin = g * q.group_size;
        const auto end = std::min(begin + q.group_size, q.count());
        for (std::size_t i = begin; i < end; ++i) {
            data[i] = q.zero[g] + q.range[g] * (static_cast<double>(q.code(i)) / levels);
        }
    }
    return out;
}

std::string debug_dump(const QuantizedBlock& q) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(q.packed.size() * 2);
    for (auto byte : q.packed) {
        hex.push_back(kHex[byte >> 4]);
        hex.push_back(kHex[byte & 0xF]);
    }
    nlohmann::json j;
    j["rows"] = q.rows;
    j["cols"] = q.cols;
    j["bits"] = q.bits;
    j["group_size"] = q.group_size;
    j["groups"] = nlohmann::json::array();
    for (std::size_t g = 0; g < q.num_groups(); ++g) {
        j["groups"].push_back({{"zero", q.zero[g]}, {"range", q.range[g]}});
    }
    j["codes_hex"] = hex;
    return j.dump(2);
}

}  // namespace gck
