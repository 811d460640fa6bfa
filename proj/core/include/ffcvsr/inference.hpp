#pragma once

#include <vector>

#include "ffcvsr/model.hpp"

namespace ffcvsr {

// First-frame handling. "bootstrap" mirrors the training rule: the local
// outputs seed the recurrent state and the context network still runs on
// frame 1. "algorithm1" emits the local frame directly on frame 1 and skips
// the context network there.
enum class FirstFrameMode { bootstrap, algorithm1 };

struct InferenceOptions {
    int reset_period = 50; // T; every T frames the state is replaced by the
                           // local outputs to purge accumulated error. 0 = never.
    FirstFrameMode first_frame = FirstFrameMode::bootstrap;
    bool local_only = false; // ablation: emit the local network's frame only
};

// Streaming frame-by-frame super-resolution. A session is strictly
// sequential; sessions over different videos may share one weight set.
class InferenceSession {
public:
    InferenceSession(const ModelWeights& weights, const ModelConfig& config,
                     const InferenceOptions& options = {});

    // Super-resolves the center frame of the window (replicate frames at the
    // video edges). Frame shapes are fixed by the first call.
    Tensor step(const std::vector<Tensor>& lr_window);

    int64_t frames_processed() const { return frame_count_; }

    // Instrumentation for tests and the error-accumulation harness.
    const RecurrentState& state() const { return state_; }
    const LocalOutput& last_local() const { return last_local_; }

private:
    const ModelWeights& weights_;
    ModelConfig config_;
    InferenceOptions options_;
    RecurrentState state_;
    LocalOutput last_local_;
    Shape lr_shape_{};
    int64_t frame_count_ = 0;
};

// Centered window with edge replication for frame index t (0-based).
std::vector<Tensor> window_for_frame(const std::vector<Tensor>& frames, int64_t t, int radius);

// Drives a session over a whole video; output length equals input length.
std::vector<Tensor> super_resolve_video(const std::vector<Tensor>& frames,
                                        const ModelWeights& weights, const ModelConfig& config,
                                        const InferenceOptions& options = {});

} // namespace ffcvsr
