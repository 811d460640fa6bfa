#pragma once

// Central finite-difference gradient checks. Analytic gradients come from
// the tape; the differentiated forward is the double-precision reference
// implementation, so truncation noise stays at the 64-bit level.

#include <functional>
#include <vector>

#include "ffcvsr/autograd.hpp"
#include "ffcvsr/trainer.hpp"
#include "reference_ops.hpp"
#include "test_util.hpp"

namespace testutil {

struct GradCheckResult {
    double max_error = 0.0;
    int64_t checked = 0;
};

// forward builds the scalar loss from the (watched) inputs on the active
// tape; ref_forward evaluates the same scalar from double copies.
inline GradCheckResult check_op_gradients(
    const std::function<ffcvsr::Tensor(const std::vector<ffcvsr::Tensor>&)>& forward,
    const std::function<double(const std::vector<refops::Ref>&)>& ref_forward,
    std::vector<ffcvsr::Tensor> inputs, double h = 1e-3) {
    using ffcvsr::Tensor;

    ffcvsr::GradientTape tape;
    std::vector<int> nodes;
    nodes.reserve(inputs.size());
    for (Tensor& t : inputs)
        nodes.push_back(tape.watch(t));
    Tensor loss = forward(inputs);
    auto grads = tape.gradients(loss);

    std::vector<refops::Ref> refs;
    refs.reserve(inputs.size());
    for (const Tensor& t : inputs)
        refs.push_back(refops::from_tensor(t));

    GradCheckResult result;
    for (size_t i = 0; i < inputs.size(); ++i) {
        auto it = grads.find(nodes[i]);
        const Tensor analytic =
            it != grads.end() ? it->second : Tensor::zeros(inputs[i].shape());
        for (int64_t k = 0; k < inputs[i].numel(); ++k) {
            const double orig = refs[i].v[static_cast<size_t>(k)];
            refs[i].v[static_cast<size_t>(k)] = orig + h;
            const double fp = ref_forward(refs);
            refs[i].v[static_cast<size_t>(k)] = orig - h;
            const double fm = ref_forward(refs);
            refs[i].v[static_cast<size_t>(k)] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            result.max_error =
                std::max(result.max_error, gradient_error(analytic.data()[k], fd));
            result.checked += 1;
        }
    }
    return result;
}

// End-to-end check of clip_loss gradients against finite differences of the
// reference unroll, sampling elements of every parameter tensor.
inline GradCheckResult check_model_gradients(const ffcvsr::Clip& clip,
                                             ffcvsr::ModelWeights& weights,
                                             const ffcvsr::ModelConfig& config,
                                             int samples_per_param, uint64_t seed,
                                             double h = 1e-3) {
    using ffcvsr::TrainMode;

    ffcvsr::UnrollOptions options;
    ffcvsr::Gradients grads =
        ffcvsr::compute_gradients(clip, weights, config, options, nullptr);

    refops::RefWeights ref = refops::from_weights(weights);
    std::mt19937_64 rng(seed);

    GradCheckResult result;
    for (const auto& [name, param] : weights.params()) {
        refops::Ref& target = ref.at(name);
        const ffcvsr::Tensor& analytic = grads.at(name);
        const int64_t count = param.numel();
        const int samples = std::min<int64_t>(samples_per_param, count);
        for (int s = 0; s < samples; ++s) {
            const int64_t k = static_cast<int64_t>(rng() % static_cast<uint64_t>(count));
            const double orig = target.v[static_cast<size_t>(k)];
            target.v[static_cast<size_t>(k)] = orig + h;
            const double fp = refops::clip_loss(clip, ref, config);
            target.v[static_cast<size_t>(k)] = orig - h;
            const double fm = refops::clip_loss(clip, ref, config);
            target.v[static_cast<size_t>(k)] = orig;
            const double fd = (fp - fm) / (2.0 * h);
            result.max_error =
                std::max(result.max_error, gradient_error(analytic.data()[k], fd));
            result.checked += 1;
        }
    }
    return result;
}

} // namespace testutil
