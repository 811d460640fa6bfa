#pragma once

#include <string>

#include "ffcvsr/tensor.hpp"

namespace ffcvsr {

// 8-bit grayscale PNG and binary PGM (P5) frames. Reading maps byte v to
// v/255; writing clamps to [0, 1] and rounds half away from zero. Color PNG
// input is rejected unless luma conversion is requested, in which case the
// decoded RGB planes go through rgb_to_luma.

Tensor read_frame(const std::string& path, bool luma_convert = false);

// Format chosen by extension (.png or .pgm).
void write_frame(const Tensor& frame, const std::string& path);

// Snaps values to the 8-bit grid (clamp, scale to 255, round half away from
// zero, rescale); used by the --quantize evaluation flag.
Tensor quantize_8bit(const Tensor& frame);

} // namespace ffcvsr
