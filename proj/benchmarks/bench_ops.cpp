#include <benchmark/benchmark.h>

#include <random>

#include "ffcvsr/autograd.hpp"
#include "ffcvsr/metrics.hpp"
#include "ffcvsr/resample.hpp"

using namespace ffcvsr;

namespace {

Tensor random_tensor(const Shape& shape, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    Tensor t = Tensor::zeros(shape);
    for (int64_t i = 0; i < t.numel(); ++i)
        t.data()[i] = dist(rng);
    return t;
}

} // namespace

static void bm_conv2d_forward(benchmark::State& state) {
    const int64_t c = state.range(0);
    const int64_t hw = state.range(1);
    Tensor input = random_tensor(Shape{1, c, hw, hw}, 1);
    Tensor weights = random_tensor(Shape{c, c, 3, 3}, 2);
    Tensor bias = random_tensor(Shape{1, c, 1, 1}, 3);
    for (auto _ : state) {
        Tensor out = conv2d(input, weights, bias, 1, 1);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * c * c * hw * hw * 9);
}
BENCHMARK(bm_conv2d_forward)->Args({16, 16})->Args({64, 16})->Args({64, 32});

static void bm_conv2d_train_step(benchmark::State& state) {
    const int64_t c = state.range(0);
    const int64_t hw = state.range(1);
    Tensor input = random_tensor(Shape{1, c, hw, hw}, 4);
    Tensor weights = random_tensor(Shape{c, c, 3, 3}, 5);
    Tensor bias = random_tensor(Shape{1, c, 1, 1}, 6);
    Tensor target = random_tensor(Shape{1, c, hw, hw}, 7);
    for (auto _ : state) {
        GradientTape tape;
        tape.watch(weights);
        tape.watch(bias);
        Tensor loss = mse(conv2d(input, weights, bias, 1, 1), target);
        auto grads = tape.gradients(loss);
        benchmark::DoNotOptimize(grads.size());
        weights.set_node(-1);
        bias.set_node(-1);
    }
}
BENCHMARK(bm_conv2d_train_step)->Args({16, 16})->Args({64, 16});

static void bm_conv2d_transpose_4x(benchmark::State& state) {
    const int64_t c = state.range(0);
    Tensor input = random_tensor(Shape{1, c, 16, 16}, 8);
    Tensor weights = random_tensor(Shape{c, 1, 8, 8}, 9);
    Tensor bias = random_tensor(Shape{1, 1, 1, 1}, 10);
    for (auto _ : state) {
        Tensor out = conv2d_transpose(input, weights, bias, 4, 2);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bm_conv2d_transpose_4x)->Arg(16)->Arg(64);

static void bm_space_to_depth(benchmark::State& state) {
    Tensor input = random_tensor(Shape{1, 1, 256, 256}, 11);
    for (auto _ : state) {
        Tensor out = space_to_depth(input, 4);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bm_space_to_depth);

static void bm_bicubic_upsample_4x(benchmark::State& state) {
    Tensor frame = random_tensor(Shape{1, 1, 64, 64}, 12);
    for (auto _ : state) {
        Tensor out = bicubic_upsample(frame, 4);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(bm_bicubic_upsample_4x);

static void bm_ssim(benchmark::State& state) {
    Tensor a = random_tensor(Shape{1, 1, 128, 128}, 13);
    Tensor b = random_tensor(Shape{1, 1, 128, 128}, 14);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ssim(a, b));
    }
}
BENCHMARK(bm_ssim);

BENCHMARK_MAIN();
