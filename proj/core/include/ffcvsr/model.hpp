#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ffcvsr/tensor.hpp"

namespace ffcvsr {

// The two-network architecture.
//
// The local network consumes a window of consecutive LR frames and produces
// a local SR frame (deconvolution residual plus the bicubic upsample of the
// center frame) and a local feature map at LR resolution. The context network
// fuses the previous SR frame and feature with the local outputs: the two HR
// frames enter through space-to-depth so all four inputs share the LR grid,
// and its SR output is a residual on top of the local frame.
//
// Trunk layout of each network: input conv -> ResBlocks -> 2 convs, with a
// 2-conv side head for the feature output branching off the last trunk
// activation. ResBlock = conv3x3 -> ReLU -> conv3x3 -> skip add, no batch
// norm. ReLU follows every trunk conv; output heads are linear.

struct ModelConfig {
    int scale = 4;             // upsampling factor; even (deconv kernel 2*scale, pad scale/2)
    int trunk_width = 64;      // channels in the conv trunks
    int feature_channels = 64; // channels of the recurrent feature, at LR resolution
    int resblocks_local = 8;
    int resblocks_context = 4;
    int temporal_radius = 1;   // LR frames on each side of the center frame

    int window_size() const { return 2 * temporal_radius + 1; }
    int context_input_channels() const { return 2 * scale * scale + 2 * feature_channels; }
    void validate() const;
};

// Named parameter set, partitioned into the "netl." and "netc." namespaces.
// Iteration order is the sorted name order everywhere, so weight files and
// update sequences are deterministic.
class ModelWeights {
public:
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }
    void insert(const std::string& name, Tensor t);

    std::map<std::string, Tensor>& params() { return params_; }
    const std::map<std::string, Tensor>& params() const { return params_; }

    int64_t parameter_count() const;
    ModelWeights clone() const;

private:
    std::map<std::string, Tensor> params_;
};

struct LocalOutput {
    Tensor sr_local; // HR frame, scale x LR extents
    Tensor f_local;  // LR-resolution feature map, feature_channels channels
};

struct RecurrentState {
    Tensor sr_prev; // SR_{t-1}, HR resolution
    Tensor f_prev;  // F_{t-1}, LR resolution

    bool empty() const { return !sr_prev.defined(); }
};

struct ContextOutput {
    Tensor sr;
    Tensor f;
};

// Parameter names and shapes implied by a config, in initialization order.
std::vector<std::pair<std::string, Shape>> expected_parameters(const ModelConfig& config);

// He-normal init (std = sqrt(2 / fan_in)), zero biases; the second conv of
// each ResBlock, each feature head's final conv, and the deconvolutions are
// scaled by 0.1 so the residual paths start near zero. Fully determined by
// the seed.
ModelWeights init_weights(const ModelConfig& config, uint64_t seed);

// Zeroes the deconvolution and feature-head output parameters of both
// networks, making the model an exact bicubic upsampler.
void zero_residual_paths(ModelWeights& weights);

// Rejects weight sets whose names or shapes do not match the config.
void validate_weights(const ModelWeights& weights, const ModelConfig& config);

LocalOutput net_l_forward(std::span<const Tensor> lr_window, const ModelWeights& weights,
                          const ModelConfig& config);

ContextOutput net_c_forward(const RecurrentState& state, const LocalOutput& local,
                            const ModelWeights& weights, const ModelConfig& config);

} // namespace ffcvsr
