#include "ffcvsr/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "ffcvsr/autograd.hpp"
#include "ffcvsr/error.hpp"
#include "ffcvsr/weights_io.hpp"

namespace ffcvsr {

void Clip::validate(int scale) const {
    check(!lr_frames.empty(), "clip: must contain at least one frame");
    check(lr_frames.size() == hr_frames.size(), "clip: ", lr_frames.size(), " LR frames but ",
          hr_frames.size(), " HR frames");
    const Shape& lr = lr_frames.front().shape();
    const Shape& hr = hr_frames.front().shape();
    check(hr.h == lr.h * scale && hr.w == lr.w * scale, "clip: HR extents ", hr.str(),
          " are not ", scale, "x the LR extents ", lr.str());
    for (size_t i = 0; i < lr_frames.size(); ++i) {
        check(lr_frames[i].shape() == lr, "clip: LR frame ", i, " shape differs");
        check(hr_frames[i].shape() == hr, "clip: HR frame ", i, " shape differs");
    }
}

void TrainConfig::validate() const {
    check(clip_length >= 1, "train config: clip_length must be >= 1");
    check(lr_initial > 0.0 && lr_late > 0.0, "train config: learning rates must be positive");
    check(lr_switch_step <= total_steps, "train config: lr_switch_step ", lr_switch_step,
          " exceeds total_steps ", total_steps);
    check(batch_size >= 1, "train config: batch_size must be >= 1");
    check(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0,
          "train config: Adam betas must lie in (0, 1)");
    check(epsilon > 0.0, "train config: Adam epsilon must be positive");
}

namespace {

Tensor flip_frame(const Tensor& t, bool horizontal, bool vertical) {
    const Shape& s = t.shape();
    Tensor out = Tensor::zeros(s);
    const float* src = t.data();
    float* dst = out.data();
    for (int64_t pl = 0; pl < s.n * s.c; ++pl) {
        const float* sp = src + pl * s.h * s.w;
        float* dp = dst + pl * s.h * s.w;
        for (int64_t y = 0; y < s.h; ++y) {
            const int64_t sy = vertical ? s.h - 1 - y : y;
            for (int64_t x = 0; x < s.w; ++x) {
                const int64_t sx = horizontal ? s.w - 1 - x : x;
                dp[y * s.w + x] = sp[sy * s.w + sx];
            }
        }
    }
    return out;
}

} // namespace

Clip augment_with_flags(const Clip& clip, bool hflip, bool vflip, bool reverse) {
    Clip out;
    const int64_t len = clip.length();
    out.lr_frames.reserve(len);
    out.hr_frames.reserve(len);
    for (int64_t i = 0; i < len; ++i) {
        const int64_t src = reverse ? len - 1 - i : i;
        if (hflip || vflip) {
            out.lr_frames.push_back(flip_frame(clip.lr_frames[src], hflip, vflip));
            out.hr_frames.push_back(flip_frame(clip.hr_frames[src], hflip, vflip));
        } else {
            out.lr_frames.push_back(clip.lr_frames[src]);
            out.hr_frames.push_back(clip.hr_frames[src]);
        }
    }
    return out;
}

Clip augment(const Clip& clip, std::mt19937_64& rng) {
    const bool hflip = (rng() & 1) != 0;
    const bool vflip = (rng() & 1) != 0;
    const bool reverse = (rng() & 1) != 0;
    return augment_with_flags(clip, hflip, vflip, reverse);
}

namespace {

std::vector<Tensor> window_at(const Clip& clip, int64_t t, int radius) {
    std::vector<Tensor> window;
    window.reserve(2 * radius + 1);
    for (int64_t k = t - radius; k <= t + radius; ++k) {
        const int64_t idx = std::clamp<int64_t>(k, 0, clip.length() - 1);
        window.push_back(clip.lr_frames[idx]);
    }
    return window;
}

} // namespace

UnrollResult unroll_clip(const Clip& clip, const ModelWeights& weights, const ModelConfig& config,
                         const UnrollOptions& options) {
    clip.validate(config.scale);
    const int64_t len = clip.length();

    UnrollResult result;
    result.sr_frames.reserve(len);
    result.sr_local_frames.reserve(len);

    Tensor total; // scalar accumulator
    RecurrentState state;
    for (int64_t t = 0; t < len; ++t) {
        std::vector<Tensor> window = window_at(clip, t, config.temporal_radius);
        LocalOutput local = net_l_forward(window, weights, config);

        Tensor frame_loss = mse(local.sr_local, clip.hr_frames[t]);
        result.sr_local_frames.push_back(local.sr_local);

        if (options.mode == TrainMode::full) {
            if (t == 0)
                state = RecurrentState{local.sr_local, local.f_local};
            ContextOutput ctx = net_c_forward(state, local, weights, config);
            frame_loss = add(frame_loss, mse(ctx.sr, clip.hr_frames[t]));
            result.sr_frames.push_back(ctx.sr);
            state = RecurrentState{ctx.sr, ctx.f};
            if (options.detach_state)
                state = RecurrentState{state.sr_prev.detached(), state.f_prev.detached()};
        } else {
            result.sr_frames.push_back(local.sr_local);
        }

        total = total.defined() ? add(total, frame_loss) : frame_loss;
    }

    result.loss = mul_scalar(total, 1.0f / static_cast<float>(len));
    return result;
}

Tensor clip_loss(const Clip& clip, const ModelWeights& weights, const ModelConfig& config,
                 const UnrollOptions& options) {
    return unroll_clip(clip, weights, config, options).loss;
}

double lr_at(int64_t step, const TrainConfig& config) {
    check(step >= 0, "lr_at: negative step ", step);
    return step < config.lr_switch_step ? config.lr_initial : config.lr_late;
}

void adam_step(ModelWeights& weights, const Gradients& grads, OptimizerState& state,
               const TrainConfig& config, double learning_rate) {
    for (const auto& [name, g] : grads)
        check(weights.contains(name), "adam: gradient for unknown parameter '", name, "'");
    for (const auto& [name, p] : weights.params())
        check(grads.count(name) != 0, "adam: missing gradient for parameter '", name, "'");

    if (state.m.empty()) {
        for (const auto& [name, p] : weights.params()) {
            state.m.emplace(name, Tensor::zeros(p.shape()));
            state.v.emplace(name, Tensor::zeros(p.shape()));
        }
    }

    state.step += 1;
    const double b1 = config.beta1, b2 = config.beta2;
    const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    for (auto& [name, p] : weights.params()) {
        const Tensor& g = grads.at(name);
        check(g.shape() == p.shape(), "adam: gradient shape ", g.shape().str(),
              " does not match parameter '", name, "' ", p.shape().str());
        float* pm = state.m.at(name).data();
        float* pv = state.v.at(name).data();
        float* pw = p.data();
        const float* pg = g.data();
        const int64_t count = p.numel();
        for (int64_t i = 0; i < count; ++i) {
            const double gi = pg[i];
            const double m = b1 * pm[i] + (1.0 - b1) * gi;
            const double v = b2 * pv[i] + (1.0 - b2) * gi * gi;
            pm[i] = static_cast<float>(m);
            pv[i] = static_cast<float>(v);
            const double m_hat = m / bias1;
            const double v_hat = v / bias2;
            pw[i] = static_cast<float>(pw[i] - learning_rate * m_hat /
                                                   (std::sqrt(v_hat) + config.epsilon));
        }
    }
}

Gradients compute_gradients(const Clip& clip, ModelWeights& weights, const ModelConfig& config,
                            const UnrollOptions& options, float* loss_out) {
    GradientTape tape;
    std::map<std::string, int> nodes;
    for (auto& [name, p] : weights.params())
        nodes.emplace(name, tape.watch(p));

    Tensor loss = clip_loss(clip, weights, config, options);
    if (loss_out != nullptr)
        *loss_out = loss.item();

    auto by_node = tape.gradients(loss);
    Gradients grads;
    for (const auto& [name, node] : nodes) {
        auto it = by_node.find(node);
        grads.emplace(name, it != by_node.end() ? std::move(it->second)
                                                : Tensor::zeros(weights.at(name).shape()));
    }
    // Leave the parameters untracked once the tape is consumed.
    for (auto& [name, p] : weights.params())
        p.set_node(-1);
    return grads;
}

TrainResult train(const std::vector<Clip>& dataset, const ModelConfig& model_config,
                  const TrainConfig& train_config, const TrainOptions& options) {
    model_config.validate();
    train_config.validate();
    check(!dataset.empty(), "train: dataset is empty");
    for (const Clip& clip : dataset) {
        clip.validate(model_config.scale);
        check(clip.length() == train_config.clip_length, "train: dataset clip has ",
              clip.length(), " frames, config expects ", train_config.clip_length);
    }

    TrainResult result;
    result.weights = init_weights(model_config, train_config.seed);
    std::mt19937_64 rng(train_config.seed ^ 0x9e3779b97f4a7c15ull);

    const UnrollOptions unroll{options.mode, false};
    for (int64_t step = 0; step < train_config.total_steps; ++step) {
        const double lr = lr_at(step, train_config);

        // All random decisions come from the main generator, in a fixed order.
        std::vector<Clip> batch;
        batch.reserve(train_config.batch_size);
        for (int i = 0; i < train_config.batch_size; ++i) {
            const size_t idx = static_cast<size_t>(rng() % dataset.size());
            batch.push_back(options.augment ? augment(dataset[idx], rng) : dataset[idx]);
        }

        Gradients total;
        double loss_sum = 0.0;
        for (const Clip& clip : batch) {
            float loss = 0.0f;
            Gradients g = compute_gradients(clip, result.weights, model_config, unroll, &loss);
            loss_sum += loss;
            if (total.empty()) {
                total = std::move(g);
            } else {
                for (auto& [name, grad] : total)
                    accumulate(grad, g.at(name));
            }
        }
        const float inv_batch = 1.0f / static_cast<float>(train_config.batch_size);
        for (auto& [name, grad] : total) {
            float* d = grad.data();
            const int64_t count = grad.numel();
            for (int64_t i = 0; i < count; ++i)
                d[i] *= inv_batch;
        }
        const double loss_avg = loss_sum / train_config.batch_size;

        if (!std::isfinite(loss_avg)) {
            if (!options.abort_checkpoint_path.empty())
                save_weights(result.weights, options.abort_checkpoint_path);
            fail("train: non-finite loss at step ", step,
                 options.abort_checkpoint_path.empty()
                     ? ""
                     : "; last-good weights written to " + options.abort_checkpoint_path);
        }

        adam_step(result.weights, total, result.optimizer, train_config, lr);

        if (options.log_every > 0 &&
            (step % options.log_every == 0 || step == train_config.total_steps - 1)) {
            TrainLogEntry entry;
            entry.step = step;
            entry.loss = loss_avg;
            entry.learning_rate = lr;
            if (options.validator) {
                entry.validation_psnr = options.validator(result.weights);
                entry.has_validation = true;
            }
            result.history.push_back(entry);
            if (options.on_log)
                options.on_log(entry);
        }
    }
    return result;
}

void save_optimizer_state(const OptimizerState& state, const std::string& path) {
    ModelWeights container;
    container.insert("step", Tensor::full(Shape{1, 1, 1, 1}, static_cast<float>(state.step)));
    for (const auto& [name, t] : state.m)
        container.insert("m." + name, t);
    for (const auto& [name, t] : state.v)
        container.insert("v." + name, t);
    save_weights(container, path);
}

OptimizerState load_optimizer_state(const std::string& path) {
    ModelWeights container = load_weights(path);
    OptimizerState state;
    for (const auto& [name, t] : container.params()) {
        if (name == "step")
            state.step = static_cast<int64_t>(t.item());
        else if (name.rfind("m.", 0) == 0)
            state.m.emplace(name.substr(2), t);
        else if (name.rfind("v.", 0) == 0)
            state.v.emplace(name.substr(2), t);
        else
            fail("optimizer state: unknown entry '", name, "' in ", path);
    }
    return state;
}

} // namespace ffcvsr
