#pragma once

#include <string>

#include "ffcvsr/model.hpp"

namespace ffcvsr {

// Weight file format ("FFCW"), little-endian throughout:
//   magic "FFCW" | version u32 | entry count u32
//   per entry: name length u16, UTF-8 name, rank u8, extents u32 each,
//              raw 32-bit float data.
// Entries are written in sorted name order; a save/load round trip is
// bit-exact.

inline constexpr uint32_t kWeightsFormatVersion = 1;

void save_weights(const ModelWeights& weights, const std::string& path);

ModelWeights load_weights(const std::string& path);

// Loads and validates names and shapes against the config.
ModelWeights load_weights(const std::string& path, const ModelConfig& config);

} // namespace ffcvsr
