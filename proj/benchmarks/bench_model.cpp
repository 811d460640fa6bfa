#include <benchmark/benchmark.h>

#include <cmath>

#include "ffcvsr/inference.hpp"
#include "ffcvsr/model.hpp"
#include "ffcvsr/resample.hpp"
#include "ffcvsr/trainer.hpp"

using namespace ffcvsr;

namespace {

ModelConfig config_for(int trunk, int resblocks) {
    ModelConfig cfg;
    cfg.trunk_width = trunk;
    cfg.feature_channels = trunk;
    cfg.resblocks_local = resblocks;
    cfg.resblocks_context = resblocks;
    return cfg;
}

std::vector<Tensor> lr_frames(int64_t count, int64_t hw) {
    std::vector<Tensor> frames;
    for (int64_t t = 0; t < count; ++t) {
        Tensor f = Tensor::zeros(Shape{1, 1, hw, hw});
        for (int64_t i = 0; i < f.numel(); ++i)
            f.data()[i] = 0.5f + 0.4f * std::sin(0.1f * static_cast<float>(i + t));
        frames.push_back(f);
    }
    return frames;
}

} // namespace

static void bm_net_l_forward(benchmark::State& state) {
    const ModelConfig cfg = config_for(static_cast<int>(state.range(0)),
                                       static_cast<int>(state.range(1)));
    ModelWeights weights = init_weights(cfg, 1);
    std::vector<Tensor> window = lr_frames(cfg.window_size(), state.range(2));
    for (auto _ : state) {
        LocalOutput out = net_l_forward(window, weights, cfg);
        benchmark::DoNotOptimize(out.sr_local.data());
    }
}
BENCHMARK(bm_net_l_forward)
    ->Args({16, 2, 16})
    ->Args({64, 8, 16})
    ->Args({64, 8, 32})
    ->Unit(benchmark::kMillisecond);

// Full recurrent step: the ms/frame figure of the streaming pipeline.
static void bm_inference_step(benchmark::State& state) {
    const ModelConfig cfg = config_for(static_cast<int>(state.range(0)),
                                       static_cast<int>(state.range(1)));
    ModelWeights weights = init_weights(cfg, 2);
    std::vector<Tensor> video = lr_frames(8, state.range(2));
    InferenceSession session(weights, cfg);
    int64_t t = 0;
    for (auto _ : state) {
        Tensor sr = session.step(window_for_frame(video, t % 8, cfg.temporal_radius));
        benchmark::DoNotOptimize(sr.data());
        t += 1;
    }
}
BENCHMARK(bm_inference_step)
    ->Args({16, 2, 16})
    ->Args({64, 8, 16})
    ->Args({64, 8, 32})
    ->Unit(benchmark::kMillisecond);

static void bm_training_step(benchmark::State& state) {
    const ModelConfig cfg = config_for(static_cast<int>(state.range(0)),
                                       static_cast<int>(state.range(1)));
    ModelWeights weights = init_weights(cfg, 3);

    Clip clip;
    std::vector<Tensor> hr = lr_frames(state.range(2), 32);
    for (const Tensor& f : hr) {
        clip.hr_frames.push_back(f);
        clip.lr_frames.push_back(bilinear_downsample(f, cfg.scale));
    }

    TrainConfig tc;
    OptimizerState opt;
    for (auto _ : state) {
        Gradients grads = compute_gradients(clip, weights, cfg, UnrollOptions{}, nullptr);
        adam_step(weights, grads, opt, tc, 1e-4);
        benchmark::DoNotOptimize(opt.step);
    }
}
BENCHMARK(bm_training_step)->Args({16, 2, 5})->Args({16, 2, 10})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
