#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ffcvsr/model.hpp"

namespace ffcvsr {

// A consecutive sequence of paired LR/HR single-channel frames.
struct Clip {
    std::vector<Tensor> lr_frames;
    std::vector<Tensor> hr_frames;

    int64_t length() const { return static_cast<int64_t>(lr_frames.size()); }
    void validate(int scale) const;
};

struct TrainConfig {
    int clip_length = 10;
    double lr_initial = 1e-4;
    double lr_late = 1e-5;
    int64_t lr_switch_step = 300000;
    int64_t total_steps = 350000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 4;
    uint64_t seed = 0;

    void validate() const;
};

// Adam first/second moments, keyed like the parameters.
struct OptimizerState {
    std::map<std::string, Tensor> m;
    std::map<std::string, Tensor> v;
    int64_t step = 0;
};

using Gradients = std::map<std::string, Tensor>;

// With independent probability 1/2 each: horizontal flip, vertical flip,
// temporal reversal; LR and HR transformed identically.
Clip augment(const Clip& clip, std::mt19937_64& rng);
Clip augment_with_flags(const Clip& clip, bool hflip, bool vflip, bool reverse);

// "full" trains both networks jointly; "local_only" ablates the context
// network (loss and outputs come from the local network alone).
enum class TrainMode { full, local_only };

struct UnrollOptions {
    TrainMode mode = TrainMode::full;
    bool detach_state = false; // cut gradient flow through the recurrent state
};

struct UnrollResult {
    Tensor loss; // scalar, on the active tape when one is recording
    std::vector<Tensor> sr_frames;
    std::vector<Tensor> sr_local_frames;
};

// Unrolls the recurrence over the clip. Frame 1 feeds the local outputs into
// the context network as the previous state; later frames carry the previous
// step's outputs, with gradients flowing through time. LR-window edges use
// replication of the first/last frame. Loss per frame is
// mse(sr_local, hr) + mse(sr, hr), averaged over the clip.
UnrollResult unroll_clip(const Clip& clip, const ModelWeights& weights, const ModelConfig& config,
                         const UnrollOptions& options = {});

Tensor clip_loss(const Clip& clip, const ModelWeights& weights, const ModelConfig& config,
                 const UnrollOptions& options = {});

// Standard Adam with bias correction. Gradient names must match the
// parameter set exactly.
void adam_step(ModelWeights& weights, const Gradients& grads, OptimizerState& state,
               const TrainConfig& config, double learning_rate);

double lr_at(int64_t step, const TrainConfig& config);

// Gradients of clip_loss with respect to every parameter; parameters the
// loss does not reach get zero gradients.
Gradients compute_gradients(const Clip& clip, ModelWeights& weights, const ModelConfig& config,
                            const UnrollOptions& options, float* loss_out);

struct TrainLogEntry {
    int64_t step = 0;
    double loss = 0.0;
    double learning_rate = 0.0;
    double validation_psnr = 0.0; // only when a validator is installed
    bool has_validation = false;
};

struct TrainOptions {
    TrainMode mode = TrainMode::full;
    bool augment = true;
    int log_every = 50;
    std::function<void(const TrainLogEntry&)> on_log;
    std::function<double(const ModelWeights&)> validator; // evaluated at log points
    std::string abort_checkpoint_path; // weights written here if the loss diverges
};

struct TrainResult {
    ModelWeights weights;
    OptimizerState optimizer;
    std::vector<TrainLogEntry> history;
};

// sample -> augment -> clip_loss -> backward -> adam_step for total_steps.
// Deterministic given the seed. Throws on an empty dataset and aborts with
// the step number on a non-finite loss.
TrainResult train(const std::vector<Clip>& dataset, const ModelConfig& model_config,
                  const TrainConfig& train_config, const TrainOptions& options = {});

// Optimizer sidecar: step count plus moment tensors in the weight container
// format ("step", "m.<param>", "v.<param>").
void save_optimizer_state(const OptimizerState& state, const std::string& path);
OptimizerState load_optimizer_state(const std::string& path);

} // namespace ffcvsr
