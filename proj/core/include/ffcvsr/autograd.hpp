#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "ffcvsr/tensor.hpp"

namespace ffcvsr {

// Record-and-replay reverse-mode differentiation.
//
// Constructing a GradientTape makes it the active tape for the current thread
// (tapes nest as a stack; the innermost one records). While a tape is active,
// the operations below record themselves whenever at least one input is
// tracked, i.e. carries a node id obtained from watch() or from a previously
// recorded operation. gradients() replays the recorded operations once, in
// reverse order, summing contributions for values consumed more than once.
//
// A tape is single-owner: one training step builds and consumes one tape.
// Tapes are thread-local and must not be shared across threads.
class GradientTape {
public:
    GradientTape();
    ~GradientTape();
    GradientTape(const GradientTape&) = delete;
    GradientTape& operator=(const GradientTape&) = delete;

    // Tracks a leaf tensor (parameter or input) and returns its node id.
    int watch(Tensor& t);

    // Gradients of a scalar loss with respect to every tracked node that it
    // depends on, keyed by node id. Rejects nodes not created by this tape
    // or non-scalar losses.
    std::unordered_map<int, Tensor> gradients(const Tensor& loss);

    // The innermost recording tape of this thread, or nullptr.
    static GradientTape* active();

    size_t recorded_ops() const { return ops_.size(); }

    // Used by the operation implementations: allocates the output node and
    // stores the backward step. The backward callback receives the gradient
    // w.r.t. the output and returns one gradient per input (in the same
    // order); entries for untracked inputs are ignored and may be empty.
    using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out)>;
    int record(const std::vector<int>& input_nodes, const Shape& output_shape, BackwardFn backward);

private:
    struct Recorded {
        std::vector<int> inputs;
        int output;
        BackwardFn backward;
    };

    int new_node(const Shape& shape);

    std::vector<Recorded> ops_;
    std::vector<Shape> node_shapes_;
    GradientTape* outer_ = nullptr;
};

// --- Differentiable operations -----------------------------------------
//
// All operations are pure: inputs are never modified and outputs are fresh
// tensors. Convolution is cross-correlation (no kernel flip) with zero
// padding.

// weights: (out_channels, in_channels, kh, kw); bias: (1, out_channels, 1, 1).
// Output extent = floor((in + 2*padding - k) / stride) + 1.
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
              int padding);

// Adjoint of conv2d (fractionally strided convolution).
// weights: (in_channels, out_channels, kh, kw); bias: (1, out_channels, 1, 1).
// Output extent = (in - 1)*stride - 2*padding + k.
Tensor conv2d_transpose(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
                        int padding);

// (n, c, h, w) -> (n, c*block^2, h/block, w/block); input pixel (c, y, x) maps
// to output channel c*block^2 + (y%block)*block + (x%block) at (y/block, x/block).
Tensor space_to_depth(const Tensor& input, int block);

// Exact inverse of space_to_depth.
Tensor depth_to_space(const Tensor& input, int block);

Tensor relu(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(const std::vector<Tensor>& parts);
Tensor mul_scalar(const Tensor& input, float factor);

// Mean of squared elementwise differences, returned as a (1,1,1,1) tensor.
Tensor mse(const Tensor& a, const Tensor& b);

} // namespace ffcvsr
