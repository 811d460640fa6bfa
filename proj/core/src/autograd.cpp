#include "ffcvsr/autograd.hpp"

#include "ffcvsr/error.hpp"

namespace ffcvsr {

namespace {
thread_local GradientTape* g_active_tape = nullptr;
} // namespace

GradientTape::GradientTape() {
    outer_ = g_active_tape;
    g_active_tape = this;
}

GradientTape::~GradientTape() {
    g_active_tape = outer_;
}

GradientTape* GradientTape::active() {
    return g_active_tape;
}

int GradientTape::new_node(const Shape& shape) {
    node_shapes_.push_back(shape);
    return static_cast<int>(node_shapes_.size()) - 1;
}

int GradientTape::watch(Tensor& t) {
    check(t.defined(), "tape: cannot watch an undefined tensor");
    const int id = new_node(t.shape());
    t.set_node(id);
    return id;
}

int GradientTape::record(const std::vector<int>& input_nodes, const Shape& output_shape,
                         BackwardFn backward) {
    const int out = new_node(output_shape);
    ops_.push_back(Recorded{input_nodes, out, std::move(backward)});
    return out;
}

std::unordered_map<int, Tensor> GradientTape::gradients(const Tensor& loss) {
    const int loss_node = loss.node();
    check(loss_node >= 0 && loss_node < static_cast<int>(node_shapes_.size()),
          "tape: loss is not a node on this tape");
    check(loss.numel() == 1, "tape: loss must be scalar, shape is ", loss.shape().str());

    std::unordered_map<int, Tensor> grads;
    grads.emplace(loss_node, Tensor::full(Shape{1, 1, 1, 1}, 1.0f));

    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        auto found = grads.find(it->output);
        if (found == grads.end())
            continue; // output does not influence the loss
        const Tensor grad_out = found->second;
        std::vector<Tensor> input_grads = it->backward(grad_out);
        check(input_grads.size() == it->inputs.size(),
              "tape: op returned ", input_grads.size(), " gradients for ", it->inputs.size(),
              " inputs");
        for (size_t i = 0; i < it->inputs.size(); ++i) {
            const int node = it->inputs[i];
            if (node < 0 || !input_grads[i].defined())
                continue;
            auto slot = grads.find(node);
            if (slot == grads.end()) {
                Tensor acc = Tensor::zeros(input_grads[i].shape());
                accumulate(acc, input_grads[i]);
                grads.emplace(node, std::move(acc));
            } else {
                accumulate(slot->second, input_grads[i]);
            }
        }
    }
    return grads;
}

} // namespace ffcvsr
