#include "ffcvsr/inference.hpp"

#include <algorithm>

#include "ffcvsr/error.hpp"

namespace ffcvsr {

InferenceSession::InferenceSession(const ModelWeights& weights, const ModelConfig& config,
                                   const InferenceOptions& options)
    : weights_(weights), config_(config), options_(options) {
    config_.validate();
    check(options.reset_period >= 0, "inference: reset period must be >= 0, got ",
          options.reset_period);
    validate_weights(weights, config_);
}

Tensor InferenceSession::step(const std::vector<Tensor>& lr_window) {
    check(static_cast<int>(lr_window.size()) == config_.window_size(), "inference: window has ",
          lr_window.size(), " frames, config expects ", config_.window_size());
    if (frame_count_ == 0) {
        lr_shape_ = lr_window.front().shape();
    }
    for (const Tensor& f : lr_window)
        check(f.shape() == lr_shape_, "inference: frame shape ", f.shape().str(),
              " drifted from the video's ", lr_shape_.str());

    LocalOutput local = net_l_forward(lr_window, weights_, config_);
    last_local_ = local;
    const int64_t t = ++frame_count_;

    if (options_.local_only)
        return local.sr_local;

    Tensor sr;
    Tensor f;
    if (t == 1 && options_.first_frame == FirstFrameMode::algorithm1) {
        sr = local.sr_local;
        f = local.f_local;
    } else {
        if (t == 1)
            state_ = RecurrentState{local.sr_local, local.f_local};
        ContextOutput ctx = net_c_forward(state_, local, weights_, config_);
        sr = ctx.sr;
        f = ctx.f;
    }

    // Suppression updating: every T frames the carried state is replaced by
    // the local outputs instead of the context outputs.
    if (options_.reset_period > 0 && t % options_.reset_period == 0)
        state_ = RecurrentState{local.sr_local, local.f_local};
    else
        state_ = RecurrentState{sr, f};
    return sr;
}

std::vector<Tensor> window_for_frame(const std::vector<Tensor>& frames, int64_t t, int radius) {
    const int64_t len = static_cast<int64_t>(frames.size());
    std::vector<Tensor> window;
    window.reserve(2 * radius + 1);
    for (int64_t k = t - radius; k <= t + radius; ++k)
        window.push_back(frames[std::clamp<int64_t>(k, 0, len - 1)]);
    return window;
}

std::vector<Tensor> super_resolve_video(const std::vector<Tensor>& frames,
                                        const ModelWeights& weights, const ModelConfig& config,
                                        const InferenceOptions& options) {
    check(!frames.empty(), "inference: empty frame list");
    InferenceSession session(weights, config, options);
    std::vector<Tensor> out;
    out.reserve(frames.size());
    for (int64_t t = 0; t < static_cast<int64_t>(frames.size()); ++t)
        out.push_back(session.step(window_for_frame(frames, t, config.temporal_radius)));
    return out;
}

} // namespace ffcvsr
