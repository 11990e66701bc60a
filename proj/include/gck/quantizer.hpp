#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gck/matrix.hpp"

namespace gck {

enum class Rounding { Nearest, Stochastic };

struct QuantizeOptions {
    unsigned bits = 2;
    std::size_t group_size = 0;  // 0: one group per matrix row
    Rounding rounding = Rounding::Nearest;
    std::uint64_t seed = 0;      // stochastic rounding only
};

// b-bit codes packed LSB-first, plus (min, range) per group of consecutive
// row-major values. The last group may be shorter than group_size.
struct QuantizedBlock {
    std::vector<std::uint8_t> packed;
    std::vector<double> zero;   // group minimum
    std::vector<double> range;  // group max - min
    std::size_t group_size = 0;
    unsigned bits = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t count() const { return rows * cols; }
    std::size_t num_groups() const { return zero.size(); }
    std::uint32_t levels() const { return (1u << bits) - 1u; }
    std::uint32_t code(std::size_t i) const;
    std::size_t storage_bytes() const;  // packed codes + two doubles per group

    friend bool operator==(const QuantizedBlock&, const QuantizedBlock&) = default;
};

std::size_t packed_size(std::size_t count, unsigned bits);

// Throws ParameterError for bits outside 1..8, DataError on NaN/Inf input.
QuantizedBlock quantize(const Matrix& h, const QuantizeOptions& options = {});

// Throws CorruptionError if the metadata disagrees with the payload.
Matrix dequantize(const QuantizedBlock& q);

// JSON text: shape, bits, group size, per-group zero/range, hex codes.
std::string debug_dump(const QuantizedBlock& q);

}  // namespace gck
