#include "ffcvsr/model.hpp"

#include <cmath>
#include <random>

#include "ffcvsr/autograd.hpp"
#include "ffcvsr/error.hpp"
#include "ffcvsr/resample.hpp"

namespace ffcvsr {

void ModelConfig::validate() const {
    check(scale >= 2 && scale % 2 == 0,
          "model config: scale must be even and >= 2 (deconvolution uses kernel 2*scale with "
          "padding scale/2), got ", scale);
    check(trunk_width >= 1, "model config: trunk_width must be >= 1, got ", trunk_width);
    check(feature_channels >= 1, "model config: feature_channels must be >= 1, got ",
          feature_channels);
    check(resblocks_local >= 1, "model config: resblocks_local must be >= 1, got ",
          resblocks_local);
    check(resblocks_context >= 1, "model config: resblocks_context must be >= 1, got ",
          resblocks_context);
    check(temporal_radius >= 0, "model config: temporal_radius must be >= 0, got ",
          temporal_radius);
}

Tensor& ModelWeights::at(const std::string& name) {
    auto it = params_.find(name);
    check(it != params_.end(), "weights: unknown parameter '", name, "'");
    return it->second;
}

const Tensor& ModelWeights::at(const std::string& name) const {
    auto it = params_.find(name);
    check(it != params_.end(), "weights: unknown parameter '", name, "'");
    return it->second;
}

void ModelWeights::insert(const std::string& name, Tensor t) {
    check(params_.count(name) == 0, "weights: duplicate parameter '", name, "'");
    params_.emplace(name, std::move(t));
}

int64_t ModelWeights::parameter_count() const {
    int64_t total = 0;
    for (const auto& [name, t] : params_)
        total += t.numel();
    return total;
}

ModelWeights ModelWeights::clone() const {
    ModelWeights copy;
    for (const auto& [name, t] : params_)
        copy.insert(name, t.clone());
    return copy;
}

namespace {

struct LayerSpec {
    std::string name;
    Shape weight_shape; // conv: (out,in,k,k); deconv: (in,out,k,k)
    bool transpose = false;
    bool scaled_init = false; // 0.1-scaled residual/head layer
};

// Trunk + head layers of one network, in initialization order.
std::vector<LayerSpec> network_layers(const std::string& prefix, int input_channels,
                                      int resblocks, const ModelConfig& cfg) {
    const int64_t tw = cfg.trunk_width;
    const int64_t fc = cfg.feature_channels;
    const int64_t dk = 2 * cfg.scale;
    std::vector<LayerSpec> layers;
    layers.push_back({prefix + ".conv_in", Shape{tw, input_channels, 3, 3}, false, false});
    for (int i = 0; i < resblocks; ++i) {
        const std::string rb = prefix + ".resblock" + std::to_string(i);
        layers.push_back({rb + ".conv1", Shape{tw, tw, 3, 3}, false, false});
        layers.push_back({rb + ".conv2", Shape{tw, tw, 3, 3}, false, true});
    }
    layers.push_back({prefix + ".trunk_conv1", Shape{tw, tw, 3, 3}, false, false});
    layers.push_back({prefix + ".trunk_conv2", Shape{tw, tw, 3, 3}, false, false});
    layers.push_back({prefix + ".deconv", Shape{tw, 1, dk, dk}, true, true});
    layers.push_back({prefix + ".feat_head.conv1", Shape{tw, tw, 3, 3}, false, false});
    layers.push_back({prefix + ".feat_head.conv2", Shape{fc, tw, 3, 3}, false, true});
    return layers;
}

std::vector<LayerSpec> all_layers(const ModelConfig& cfg) {
    std::vector<LayerSpec> layers =
        network_layers("netl", cfg.window_size(), cfg.resblocks_local, cfg);
    std::vector<LayerSpec> ctx =
        network_layers("netc", cfg.context_input_channels(), cfg.resblocks_context, cfg);
    layers.insert(layers.end(), ctx.begin(), ctx.end());
    return layers;
}

int64_t bias_channels(const LayerSpec& l) {
    return l.transpose ? l.weight_shape.c : l.weight_shape.n;
}

// Box-Muller normal sampler on top of mt19937_64, so initialization is
// reproducible across standard library implementations.
class NormalSampler {
public:
    explicit NormalSampler(uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

private:
    double uniform() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace

std::vector<std::pair<std::string, Shape>> expected_parameters(const ModelConfig& config) {
    std::vector<std::pair<std::string, Shape>> out;
    for (const LayerSpec& l : all_layers(config)) {
        out.emplace_back(l.name + ".weight", l.weight_shape);
        out.emplace_back(l.name + ".bias", Shape{1, bias_channels(l), 1, 1});
    }
    return out;
}

ModelWeights init_weights(const ModelConfig& config, uint64_t seed) {
    config.validate();
    NormalSampler normal(seed);
    ModelWeights weights;
    for (const LayerSpec& l : all_layers(config)) {
        const Shape& s = l.weight_shape;
        const int64_t fan_in = (l.transpose ? s.n : s.c) * s.h * s.w;
        const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        const double gain = l.scaled_init ? 0.1 : 1.0;
        Tensor w = Tensor::zeros(s);
        float* data = w.data();
        const int64_t count = w.numel();
        for (int64_t i = 0; i < count; ++i)
            data[i] = static_cast<float>(normal.next() * std_dev * gain);
        weights.insert(l.name + ".weight", std::move(w));
        weights.insert(l.name + ".bias", Tensor::zeros(Shape{1, bias_channels(l), 1, 1}));
    }
    return weights;
}

void zero_residual_paths(ModelWeights& weights) {
    for (auto& [name, t] : weights.params()) {
        const bool residual = name.find(".deconv.") != std::string::npos ||
                              name.find(".feat_head.conv2.") != std::string::npos;
        if (residual)
            std::fill(t.data(), t.data() + t.numel(), 0.0f);
    }
}

void validate_weights(const ModelWeights& weights, const ModelConfig& config) {
    auto expected = expected_parameters(config);
    std::map<std::string, Shape> expected_map(expected.begin(), expected.end());
    for (const auto& [name, t] : weights.params()) {
        auto it = expected_map.find(name);
        check(it != expected_map.end(), "weights: unknown parameter '", name,
              "' for this model config");
        check(t.shape() == it->second, "weights: parameter '", name, "' has shape ",
              t.shape().str(), ", config expects ", it->second.str());
    }
    for (const auto& [name, shape] : expected_map)
        check(weights.contains(name), "weights: missing parameter '", name, "'");
}

namespace {

Tensor conv_layer(const Tensor& x, const ModelWeights& w, const std::string& name) {
    return conv2d(x, w.at(name + ".weight"), w.at(name + ".bias"), 1, 1);
}

// Shared trunk: input conv, ResBlocks, two trunk convs; ReLU throughout.
Tensor run_trunk(const Tensor& input, const ModelWeights& w, const std::string& prefix,
                 int resblocks) {
    Tensor t = relu(conv_layer(input, w, prefix + ".conv_in"));
    for (int i = 0; i < resblocks; ++i) {
        const std::string rb = prefix + ".resblock" + std::to_string(i);
        Tensor r = conv_layer(relu(conv_layer(t, w, rb + ".conv1")), w, rb + ".conv2");
        t = add(t, r);
    }
    t = relu(conv_layer(t, w, prefix + ".trunk_conv1"));
    t = relu(conv_layer(t, w, prefix + ".trunk_conv2"));
    return t;
}

Tensor run_deconv(const Tensor& trunk, const ModelWeights& w, const std::string& prefix,
                  const ModelConfig& cfg) {
    return conv2d_transpose(trunk, w.at(prefix + ".deconv.weight"),
                            w.at(prefix + ".deconv.bias"), cfg.scale, cfg.scale / 2);
}

Tensor run_feature_head(const Tensor& trunk, const ModelWeights& w, const std::string& prefix) {
    Tensor h = relu(conv_layer(trunk, w, prefix + ".feat_head.conv1"));
    return conv_layer(h, w, prefix + ".feat_head.conv2"); // linear output
}

} // namespace

LocalOutput net_l_forward(std::span<const Tensor> lr_window, const ModelWeights& weights,
                          const ModelConfig& config) {
    config.validate();
    check(static_cast<int>(lr_window.size()) == config.window_size(),
          "net_l: window has ", lr_window.size(), " frames, config expects ",
          config.window_size());
    const Shape& frame_shape = lr_window.front().shape();
    check(frame_shape.c == 1, "net_l: LR frames must be single-channel, got ",
          frame_shape.str());
    for (size_t i = 1; i < lr_window.size(); ++i)
        check(lr_window[i].shape() == frame_shape, "net_l: window frame ", i, " has shape ",
              lr_window[i].shape().str(), ", expected ", frame_shape.str());

    std::vector<Tensor> frames(lr_window.begin(), lr_window.end());
    Tensor trunk = run_trunk(concat_channels(frames), weights, "netl", config.resblocks_local);

    const Tensor& center = lr_window[lr_window.size() / 2];
    Tensor skip = bicubic_upsample(center, config.scale);
    LocalOutput out;
    out.sr_local = add(run_deconv(trunk, weights, "netl", config), skip);
    out.f_local = run_feature_head(trunk, weights, "netl");
    return out;
}

ContextOutput net_c_forward(const RecurrentState& state, const LocalOutput& local,
                            const ModelWeights& weights, const ModelConfig& config) {
    config.validate();
    check(state.sr_prev.defined() && state.f_prev.defined(), "net_c: empty recurrent state");
    check(state.sr_prev.shape() == local.sr_local.shape(), "net_c: previous SR frame shape ",
          state.sr_prev.shape().str(), " does not match local SR frame ",
          local.sr_local.shape().str());
    check(state.f_prev.shape() == local.f_local.shape(), "net_c: previous feature shape ",
          state.f_prev.shape().str(), " does not match local feature ",
          local.f_local.shape().str());
    check(local.sr_local.shape().h == local.f_local.shape().h * config.scale &&
              local.sr_local.shape().w == local.f_local.shape().w * config.scale,
          "net_c: SR frame ", local.sr_local.shape().str(), " is not scale x feature grid ",
          local.f_local.shape().str());

    Tensor prev_planes = space_to_depth(state.sr_prev, config.scale);
    Tensor local_planes = space_to_depth(local.sr_local, config.scale);
    Tensor fused = concat_channels({prev_planes, local_planes, state.f_prev, local.f_local});

    Tensor trunk = run_trunk(fused, weights, "netc", config.resblocks_context);
    ContextOutput out;
    out.sr = add(run_deconv(trunk, weights, "netc", config), local.sr_local);
    out.f = run_feature_head(trunk, weights, "netc");
    return out;
}

} // namespace ffcvsr
