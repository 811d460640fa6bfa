#include "ffcvsr/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ffcvsr/error.hpp"

namespace ffcvsr {

namespace {

// Keys cubic kernel, a = -0.5.
double keys(double t) {
    t = std::fabs(t);
    if (t <= 1.0)
        return (1.5 * t - 2.5) * t * t + 1.0;
    if (t < 2.0)
        return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

struct Taps {
    int64_t index[4];
    double weight[4];
    int count;
};

// 4-tap Keys taps for one output coordinate; indices clamped to [0, n).
// The last weight absorbs the normalization so the taps sum to exactly 1.
Taps bicubic_taps(double src, int64_t n) {
    const double base = std::floor(src);
    const double frac = src - base;
    Taps t;
    t.count = 4;
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
        const int64_t idx = static_cast<int64_t>(base) - 1 + k;
        t.index[k] = std::clamp<int64_t>(idx, 0, n - 1);
        t.weight[k] = keys(frac + 1.0 - k);
        sum += t.weight[k];
    }
    t.weight[3] += 1.0 - sum;
    return t;
}

Taps bilinear_taps(double src, int64_t n) {
    const double base = std::floor(src);
    const double frac = src - base;
    Taps t;
    t.count = 2;
    t.index[0] = std::clamp<int64_t>(static_cast<int64_t>(base), 0, n - 1);
    t.index[1] = std::clamp<int64_t>(static_cast<int64_t>(base) + 1, 0, n - 1);
    t.weight[0] = 1.0 - frac;
    t.weight[1] = 1.0 - t.weight[0];
    return t;
}

using TapFn = Taps (*)(double, int64_t);

// Separable resampling of every (n, c) plane: horizontal pass then vertical.
Tensor resample_separable(const Tensor& in, int64_t out_h, int64_t out_w,
                          double coord_scale, double coord_offset, TapFn taps_for) {
    const Shape& s = in.shape();
    const int64_t planes = s.n * s.c;

    std::vector<Taps> col_taps(static_cast<size_t>(out_w));
    for (int64_t x = 0; x < out_w; ++x)
        col_taps[x] = taps_for((x + 0.5) * coord_scale + coord_offset, s.w);
    std::vector<Taps> row_taps(static_cast<size_t>(out_h));
    for (int64_t y = 0; y < out_h; ++y)
        row_taps[y] = taps_for((y + 0.5) * coord_scale + coord_offset, s.h);

    Tensor out = Tensor::zeros(Shape{s.n, s.c, out_h, out_w});
    std::vector<double> mid(static_cast<size_t>(s.h * out_w));
    for (int64_t pl = 0; pl < planes; ++pl) {
        const float* src = in.data() + pl * s.h * s.w;
        for (int64_t y = 0; y < s.h; ++y) {
            const float* row = src + y * s.w;
            double* dst = mid.data() + y * out_w;
            for (int64_t x = 0; x < out_w; ++x) {
                const Taps& t = col_taps[x];
                double acc = 0.0;
                for (int k = 0; k < t.count; ++k)
                    acc += t.weight[k] * row[t.index[k]];
                dst[x] = acc;
            }
        }
        float* dst_plane = out.data() + pl * out_h * out_w;
        for (int64_t y = 0; y < out_h; ++y) {
            const Taps& t = row_taps[y];
            for (int64_t x = 0; x < out_w; ++x) {
                double acc = 0.0;
                for (int k = 0; k < t.count; ++k)
                    acc += t.weight[k] * mid[t.index[k] * out_w + x];
                dst_plane[y * out_w + x] = static_cast<float>(acc);
            }
        }
    }
    return out;
}

} // namespace

Tensor bicubic_upsample(const Tensor& frame, int scale) {
    check(frame.defined() && frame.numel() > 0, "bicubic_upsample: empty frame");
    check(scale >= 1, "bicubic_upsample: scale must be >= 1, got ", scale);
    const Shape& s = frame.shape();
    return resample_separable(frame, s.h * scale, s.w * scale, 1.0 / scale, -0.5, bicubic_taps);
}

Tensor bicubic_downsample(const Tensor& frame, int scale) {
    check(frame.defined() && frame.numel() > 0, "bicubic_downsample: empty frame");
    check(scale >= 1, "bicubic_downsample: scale must be >= 1, got ", scale);
    const Shape& s = frame.shape();
    check(s.h % scale == 0, "bicubic_downsample: height ", s.h, " not divisible by ", scale);
    check(s.w % scale == 0, "bicubic_downsample: width ", s.w, " not divisible by ", scale);
    return resample_separable(frame, s.h / scale, s.w / scale, scale, -0.5, bicubic_taps);
}

Tensor bilinear_downsample(const Tensor& frame, int scale) {
    check(frame.defined() && frame.numel() > 0, "bilinear_downsample: empty frame");
    check(scale >= 1, "bilinear_downsample: scale must be >= 1, got ", scale);
    const Shape& s = frame.shape();
    check(s.h % scale == 0, "bilinear_downsample: height ", s.h, " not divisible by ", scale);
    check(s.w % scale == 0, "bilinear_downsample: width ", s.w, " not divisible by ", scale);
    return resample_separable(frame, s.h / scale, s.w / scale, scale, -0.5, bilinear_taps);
}

Tensor rgb_to_luma(const Tensor& r, const Tensor& g, const Tensor& b) {
    check(r.defined() && g.defined() && b.defined(), "rgb_to_luma: undefined plane");
    check(r.shape() == g.shape() && g.shape() == b.shape(), "rgb_to_luma: plane shapes differ: ",
          r.shape().str(), ", ", g.shape().str(), ", ", b.shape().str());
    Tensor y = Tensor::zeros(r.shape());
    const float* pr = r.data();
    const float* pg = g.data();
    const float* pb = b.data();
    float* py = y.data();
    const int64_t count = r.numel();
    for (int64_t i = 0; i < count; ++i) {
        const double v = 65.481 * pr[i] + 128.553 * pg[i] + 24.966 * pb[i] + 16.0;
        py[i] = static_cast<float>(v / 255.0);
    }
    return y;
}

Tensor clamp01(const Tensor& frame) {
    Tensor out = Tensor::zeros(frame.shape());
    const float* s = frame.data();
    float* o = out.data();
    const int64_t count = frame.numel();
    for (int64_t i = 0; i < count; ++i)
        o[i] = std::clamp(s[i], 0.0f, 1.0f);
    return out;
}

} // namespace ffcvsr
