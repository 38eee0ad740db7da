#pragma once

#include <string>

#include "mapper.hpp"
#include "policy_net.hpp"

namespace cvt {

// Binary checkpoint wire format (all integers little-endian unsigned 32-bit):
//   magic "A3CX" | version | descriptor text (length-prefixed) | tensor count
//   per tensor: name (length-prefixed) | rank | dims... | float32 LE data
// Tensor values are persisted at 32-bit precision; loading widens back to
// double. Writes go to a temp file renamed on success, so a failed save
// never leaves a partial checkpoint behind.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParameterSet& params, const std::string& path);
ParameterSet load_checkpoint(const std::string& path);

// LinearMapper rides the same wire format: descriptor "mapper", one named
// tensor "mapper.W" of shape [dim, dim+1].
void save_linear_mapper(const LinearMapper& mapper, const std::string& path);
LinearMapper load_linear_mapper(const std::string& path);

// Rounds every tensor entry through float32, matching what a save/load
// round trip produces.
ParameterSet quantize_to_f32(const ParameterSet& params);

}  // namespace cvt
