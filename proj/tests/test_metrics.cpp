#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ffcvsr/error.hpp"
#include "ffcvsr/metrics.hpp"
#include "reference_ops.hpp"
#include "test_util.hpp"

using namespace ffcvsr;
using testutil::random_tensor;

TEST_SUITE("metrics") {

TEST_CASE("psnr sentinel and closed forms") {
    auto rng = testutil::make_rng(91);
    Tensor frame = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0f, 1.0f);
    CHECK(psnr(frame, frame) == kPsnrInfinity);

    Tensor a = Tensor::full(Shape{1, 1, 16, 16}, 0.3f);
    Tensor b = Tensor::full(Shape{1, 1, 16, 16}, 0.4f);
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-5));

    CHECK_THROWS_AS(psnr(a, Tensor::zeros(Shape{1, 1, 16, 8})), Error);
}

TEST_CASE("psnr matches a direct-summation oracle") {
    auto rng = testutil::make_rng(92);
    Tensor a = random_tensor(Shape{1, 1, 12, 12}, rng, 0.0f, 1.0f);
    Tensor b = random_tensor(Shape{1, 1, 12, 12}, rng, 0.0f, 1.0f);

    const double m = refops::mse(refops::from_tensor(a), refops::from_tensor(b));
    const double expect = 10.0 * std::log10(1.0 / m);
    CHECK(std::fabs(psnr(a, b) - expect) < 1e-6);
}

TEST_CASE("psnr and ssim are symmetric") {
    auto rng = testutil::make_rng(93);
    Tensor a = random_tensor(Shape{1, 1, 16, 16}, rng, 0.0f, 1.0f);
    Tensor b = random_tensor(Shape{1, 1, 16, 16}, rng, 0.0f, 1.0f);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)).epsilon(1e-12));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("psnr strictly decreases with increasing noise amplitude") {
    Tensor base = testutil::synthetic_frame(24, 24, 0);
    auto rng = testutil::make_rng(94);
    Tensor noise = random_tensor(base.shape(), rng, -1.0f, 1.0f);

    double previous = kPsnrInfinity;
    for (float amp : {0.01f, 0.02f, 0.05f, 0.1f}) {
        Tensor noisy = base.clone();
        for (int64_t i = 0; i < noisy.numel(); ++i)
            noisy.data()[i] += amp * noise.data()[i];
        const double p = psnr(base, noisy);
        CHECK(p < previous);
        previous = p;
    }
}

TEST_CASE("ssim of identical frames is exactly one") {
    auto rng = testutil::make_rng(95);
    Tensor frame = random_tensor(Shape{1, 1, 16, 16}, rng, 0.0f, 1.0f);
    CHECK(ssim(frame, frame) == 1.0);
}

TEST_CASE("ssim constant-image closed form") {
    Tensor a = Tensor::full(Shape{1, 1, 16, 16}, 0.2f);
    Tensor b = Tensor::full(Shape{1, 1, 16, 16}, 0.8f);
    const double c1 = 0.01 * 0.01;
    const double expect = (2.0 * 0.2 * 0.8 + c1) / (0.2 * 0.2 + 0.8 * 0.8 + c1);
    CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("ssim matches the independent reference implementation") {
    auto rng = testutil::make_rng(96);
    for (int trial = 0; trial < 3; ++trial) {
        Tensor a = random_tensor(Shape{1, 1, 20, 24}, rng, 0.0f, 1.0f);
        Tensor b = random_tensor(Shape{1, 1, 20, 24}, rng, 0.0f, 1.0f);
        CHECK(std::fabs(ssim(a, b) - refops::ssim(a, b)) < 1e-4);
    }
}

TEST_CASE("ssim bounds and window preconditions") {
    auto rng = testutil::make_rng(97);
    Tensor a = random_tensor(Shape{1, 1, 15, 15}, rng, 0.0f, 1.0f);
    Tensor b = random_tensor(Shape{1, 1, 15, 15}, rng, 0.0f, 1.0f);
    const double s = ssim(a, b);
    CHECK(s <= 1.0);
    CHECK(s >= -1.0);

    CHECK_THROWS_WITH_AS(ssim(Tensor::zeros(Shape{1, 1, 8, 8}), Tensor::zeros(Shape{1, 1, 8, 8})),
                         doctest::Contains("window"), Error);
}

TEST_CASE("temporal profile of a static video repeats one row") {
    Tensor frame = testutil::synthetic_frame(8, 10, 0);
    std::vector<Tensor> video(4, frame);
    Tensor profile = temporal_profile(video, 3);
    CHECK(profile.shape() == Shape{1, 1, 4, 10});
    for (int64_t t = 0; t < 4; ++t)
        for (int64_t x = 0; x < 10; ++x)
            CHECK(profile.at(0, 0, t, x) == frame.at(0, 0, 3, x));
}

TEST_CASE("temporal profile of a brightness ramp is a vertical gradient") {
    std::vector<Tensor> video;
    const int64_t n = 5;
    for (int64_t t = 0; t < n; ++t)
        video.push_back(Tensor::full(Shape{1, 1, 4, 6}, static_cast<float>(t) / n));
    Tensor profile = temporal_profile(video, 1);
    for (int64_t t = 0; t < n; ++t)
        for (int64_t x = 0; x < 6; ++x)
            CHECK(profile.at(0, 0, t, x) == static_cast<float>(t) / n);
}

TEST_CASE("temporal profile is a pure gather") {
    auto rng = testutil::make_rng(98);
    std::vector<Tensor> video;
    for (int t = 0; t < 3; ++t)
        video.push_back(random_tensor(Shape{1, 1, 6, 7}, rng, 0.0f, 1.0f));
    Tensor profile = temporal_profile(video, 2);

    std::vector<float> pool;
    for (const Tensor& f : video)
        pool.insert(pool.end(), f.data(), f.data() + f.numel());
    std::sort(pool.begin(), pool.end());
    for (int64_t i = 0; i < profile.numel(); ++i)
        CHECK(std::binary_search(pool.begin(), pool.end(), profile.data()[i]));

    CHECK_THROWS_AS(temporal_profile(video, 6), Error);
    CHECK_THROWS_AS(temporal_profile({}, 0), Error);

    // Single-frame video: the profile is that frame's row.
    Tensor single = temporal_profile({video[0]}, 4);
    for (int64_t x = 0; x < 7; ++x)
        CHECK(single.at(0, 0, 0, x) == video[0].at(0, 0, 4, x));
}

TEST_CASE("evaluate_video trivial cases and report format") {
    std::vector<Tensor> video = testutil::synthetic_video(2, 24, 24);
    EvalReport report = evaluate_video(video, video, 4);
    CHECK(report.frame_count == 2);
    CHECK(report.infinite_psnr_frames == 2);
    CHECK(report.psnr_average == kPsnrInfinity);
    CHECK(report.ssim_average == doctest::Approx(1.0));

    const std::string text = report.to_text();
    CHECK(text.find("frame\tpsnr_db\tssim") == 0);
    CHECK(text.find("average\tinf\t") != std::string::npos);
    CHECK(text.find("infinite_psnr_frames\t2") != std::string::npos);
}

TEST_CASE("evaluate_video single frame and hand-computed two-frame mean") {
    auto rng = testutil::make_rng(99);
    std::vector<Tensor> sr = {random_tensor(Shape{1, 1, 20, 20}, rng, 0.0f, 1.0f),
                              random_tensor(Shape{1, 1, 20, 20}, rng, 0.0f, 1.0f)};
    std::vector<Tensor> hr = {random_tensor(Shape{1, 1, 20, 20}, rng, 0.0f, 1.0f),
                              random_tensor(Shape{1, 1, 20, 20}, rng, 0.0f, 1.0f)};

    EvalReport single = evaluate_video({sr[0]}, {hr[0]}, 0);
    CHECK(single.psnr_average == doctest::Approx(single.psnr_db[0]));
    CHECK(single.ssim_average == doctest::Approx(single.ssim_score[0]));

    EvalReport both = evaluate_video(sr, hr, 0);
    CHECK(both.psnr_average ==
          doctest::Approx((both.psnr_db[0] + both.psnr_db[1]) / 2.0).epsilon(1e-12));
}

TEST_CASE("evaluate_video rejects an oversized crop") {
    std::vector<Tensor> video = testutil::synthetic_video(1, 16, 16);
    CHECK_THROWS_AS(evaluate_video(video, video, 8), Error);
}

} // TEST_SUITE
