#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ffcvsr/tensor.hpp"

namespace ffcvsr {

// Frame values are interpreted on a [0, 1] scale (peak = 1). Identical
// frames yield the +infinity PSNR sentinel.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

double psnr(const Tensor& a, const Tensor& b);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, dynamic range 1. Frames must be at least 11x11.
double ssim(const Tensor& a, const Tensor& b);

// Stacks pixel row `row` of every frame: output extents (frame_count, width).
Tensor temporal_profile(const std::vector<Tensor>& video, int64_t row);

struct EvalReport {
    std::vector<double> psnr_db;
    std::vector<double> ssim_score;
    double psnr_average = 0.0; // over non-infinite frames; infinity if all are
    double ssim_average = 0.0;
    int64_t frame_count = 0;
    int64_t infinite_psnr_frames = 0;

    // Line-oriented text: header, frame rows, then the average row.
    std::string to_text() const;
};

// Crops border_crop pixels from every side of both frames before computing
// the per-frame metrics.
EvalReport evaluate_video(const std::vector<Tensor>& sr, const std::vector<Tensor>& hr,
                          int64_t border_crop);

} // namespace ffcvsr
