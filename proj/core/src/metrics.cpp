#include "ffcvsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ffcvsr/error.hpp"

namespace ffcvsr {

double psnr(const Tensor& a, const Tensor& b) {
    check(a.defined() && b.defined(), "psnr: undefined frame");
    check(a.shape() == b.shape(), "psnr: shape mismatch ", a.shape().str(), " vs ",
          b.shape().str());
    const float* pa = a.data();
    const float* pb = b.data();
    const int64_t count = a.numel();
    check(count > 0, "psnr: empty frames");
    double sum = 0.0;
    for (int64_t i = 0; i < count; ++i) {
        const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
        sum += d * d;
    }
    const double mse = sum / count;
    if (mse == 0.0)
        return kPsnrInfinity;
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

std::vector<double> gaussian_taps() {
    std::vector<double> taps(kSsimWindow);
    const int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        taps[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[i];
    }
    for (double& t : taps)
        t /= sum;
    return taps;
}

// Valid-region separable Gaussian filter: output extents (h-10, w-10).
std::vector<double> gauss_filter_valid(const std::vector<double>& img, int64_t h, int64_t w,
                                       const std::vector<double>& taps) {
    const int64_t ow = w - kSsimWindow + 1;
    const int64_t oh = h - kSsimWindow + 1;
    std::vector<double> mid(static_cast<size_t>(h * ow));
    for (int64_t y = 0; y < h; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k)
                acc += taps[k] * img[y * w + x + k];
            mid[y * ow + x] = acc;
        }
    std::vector<double> out(static_cast<size_t>(oh * ow));
    for (int64_t y = 0; y < oh; ++y)
        for (int64_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k)
                acc += taps[k] * mid[(y + k) * ow + x];
            out[y * ow + x] = acc;
        }
    return out;
}

} // namespace

double ssim(const Tensor& a, const Tensor& b) {
    check(a.defined() && b.defined(), "ssim: undefined frame");
    check(a.shape() == b.shape(), "ssim: shape mismatch ", a.shape().str(), " vs ",
          b.shape().str());
    const Shape& s = a.shape();
    check(s.n == 1 && s.c == 1, "ssim: expects a single-channel frame, got ", s.str());
    check(s.h >= kSsimWindow && s.w >= kSsimWindow, "ssim: frame ", s.str(),
          " smaller than the ", kSsimWindow, "x", kSsimWindow, " window");

    const int64_t count = s.h * s.w;
    std::vector<double> x(count), y(count), xx(count), yy(count), xy(count);
    const float* pa = a.data();
    const float* pb = b.data();
    for (int64_t i = 0; i < count; ++i) {
        x[i] = pa[i];
        y[i] = pb[i];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }

    const std::vector<double> taps = gaussian_taps();
    const std::vector<double> mu_x = gauss_filter_valid(x, s.h, s.w, taps);
    const std::vector<double> mu_y = gauss_filter_valid(y, s.h, s.w, taps);
    const std::vector<double> e_xx = gauss_filter_valid(xx, s.h, s.w, taps);
    const std::vector<double> e_yy = gauss_filter_valid(yy, s.h, s.w, taps);
    const std::vector<double> e_xy = gauss_filter_valid(xy, s.h, s.w, taps);

    double total = 0.0;
    for (size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double var_x = e_xx[i] - mx * mx;
        const double var_y = e_yy[i] - my * my;
        const double cov = e_xy[i] - mx * my;
        const double num = (2.0 * mx * my + kSsimC1) * (2.0 * cov + kSsimC2);
        const double den = (mx * mx + my * my + kSsimC1) * (var_x + var_y + kSsimC2);
        total += num / den;
    }
    return total / static_cast<double>(mu_x.size());
}

Tensor temporal_profile(const std::vector<Tensor>& video, int64_t row) {
    check(!video.empty(), "temporal_profile: empty video");
    const Shape& s = video.front().shape();
    check(row >= 0 && row < s.h, "temporal_profile: row ", row, " out of range for height ",
          s.h);
    Tensor out = Tensor::zeros(Shape{1, 1, static_cast<int64_t>(video.size()), s.w});
    for (size_t t = 0; t < video.size(); ++t) {
        check(video[t].shape() == s, "temporal_profile: frame ", t, " shape differs");
        const float* src = video[t].data() + row * s.w;
        std::copy(src, src + s.w, out.data() + static_cast<int64_t>(t) * s.w);
    }
    return out;
}

namespace {

Tensor crop_border(const Tensor& frame, int64_t crop) {
    if (crop == 0)
        return frame;
    const Shape& s = frame.shape();
    Tensor out = Tensor::zeros(Shape{s.n, s.c, s.h - 2 * crop, s.w - 2 * crop});
    for (int64_t pl = 0; pl < s.n * s.c; ++pl) {
        const float* src = frame.data() + pl * s.h * s.w;
        float* dst = out.data() + pl * (s.h - 2 * crop) * (s.w - 2 * crop);
        for (int64_t y = 0; y < s.h - 2 * crop; ++y)
            std::copy(src + (y + crop) * s.w + crop, src + (y + crop) * s.w + crop + s.w - 2 * crop,
                      dst + y * (s.w - 2 * crop));
    }
    return out;
}

std::string format_metric(double v) {
    if (v == kPsnrInfinity)
        return "inf";
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    return os.str();
}

} // namespace

EvalReport evaluate_video(const std::vector<Tensor>& sr, const std::vector<Tensor>& hr,
                          int64_t border_crop) {
    check(!sr.empty(), "evaluate: empty frame lists");
    check(sr.size() == hr.size(), "evaluate: ", sr.size(), " SR frames vs ", hr.size(),
          " HR frames");
    check(border_crop >= 0, "evaluate: negative border crop");
    const Shape& s = sr.front().shape();
    check(s.h > 2 * border_crop && s.w > 2 * border_crop, "evaluate: border crop ", border_crop,
          " exceeds frame extents ", s.str());

    EvalReport report;
    report.frame_count = static_cast<int64_t>(sr.size());
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
    for (size_t i = 0; i < sr.size(); ++i) {
        Tensor a = crop_border(sr[i], border_crop);
        Tensor b = crop_border(hr[i], border_crop);
        const double p = psnr(a, b);
        const double q = ssim(a, b);
        report.psnr_db.push_back(p);
        report.ssim_score.push_back(q);
        if (p == kPsnrInfinity)
            report.infinite_psnr_frames += 1;
        else
            psnr_sum += p;
        ssim_sum += q;
    }
    const int64_t finite = report.frame_count - report.infinite_psnr_frames;
    report.psnr_average = finite > 0 ? psnr_sum / finite : kPsnrInfinity;
    report.ssim_average = ssim_sum / report.frame_count;
    return report;
}

std::string EvalReport::to_text() const {
    std::ostringstream os;
    os << "frame\tpsnr_db\tssim\n";
    for (int64_t i = 0; i < frame_count; ++i)
        os << (i + 1) << "\t" << format_metric(psnr_db[i]) << "\t"
           << format_metric(ssim_score[i]) << "\n";
    os << "average\t" << format_metric(psnr_average) << "\t" << format_metric(ssim_average)
       << "\n";
    if (infinite_psnr_frames > 0)
        os << "infinite_psnr_frames\t" << infinite_psnr_frames << "\n";
    return os.str();
}

} // namespace ffcvsr
