#pragma once

#include "ffcvsr/tensor.hpp"

namespace ffcvsr {

// Fixed (non-learned) resampling and color primitives. All functions use the
// half-pixel-centered coordinate convention: output sample i reads the input
// at (i + 0.5) / scale - 0.5 when upsampling and (i + 0.5) * scale - 0.5 when
// downsampling, with source coordinates clamped at the edges. Arithmetic runs
// in double internally and tap weights are normalized to sum to one, so
// constant inputs are reproduced exactly.

// Keys bicubic (a = -0.5), integer upscaling factor >= 1.
Tensor bicubic_upsample(const Tensor& frame, int scale);

// Keys bicubic, integer downscaling factor; extents must be divisible.
// Plain 4-tap sampling at the mapped coordinates, no prefilter.
Tensor bicubic_downsample(const Tensor& frame, int scale);

// Two-tap bilinear, integer downscaling factor; extents must be divisible.
Tensor bilinear_downsample(const Tensor& frame, int scale);

// Studio-swing YCbCr luma: Y = (65.481 R + 128.553 G + 24.966 B + 16) / 255.
Tensor rgb_to_luma(const Tensor& r, const Tensor& g, const Tensor& b);

// Clamps every value into [0, 1]; applied at final output emission only.
Tensor clamp01(const Tensor& frame);

} // namespace ffcvsr
