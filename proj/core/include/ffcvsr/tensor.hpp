#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ffcvsr {

// Extents of a rank-4 array in (batch, channels, height, width) order.
struct Shape {
    int64_t n = 0;
    int64_t c = 0;
    int64_t h = 0;
    int64_t w = 0;

    int64_t numel() const { return n * c * h * w; }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

// Dense rank-4 float32 array, contiguous in row-major (batch-major) order.
//
// Copies are shallow: they alias the same storage. Operations in autograd.hpp
// never mutate their inputs and always allocate fresh outputs; in-place writes
// through data()/at() are reserved for construction and weight updates.
// clone() makes a deep copy.
//
// node() is the tensor's handle into the currently recording GradientTape,
// or -1 when the value is not tracked.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(const Shape& shape);

    static Tensor zeros(const Shape& shape);
    static Tensor full(const Shape& shape, float value);
    static Tensor from_vector(const Shape& shape, std::vector<float> values);

    const Shape& shape() const { return shape_; }
    int64_t numel() const { return shape_.numel(); }
    bool defined() const { return store_ != nullptr; }

    float* data() { return store_->data(); }
    const float* data() const { return store_->data(); }

    int64_t offset(int64_t n, int64_t c, int64_t y, int64_t x) const {
        return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }
    float& at(int64_t n, int64_t c, int64_t y, int64_t x) {
        return store_->at(static_cast<size_t>(offset(n, c, y, x)));
    }
    float at(int64_t n, int64_t c, int64_t y, int64_t x) const {
        return store_->at(static_cast<size_t>(offset(n, c, y, x)));
    }

    // Value of a single-element tensor.
    float item() const;

    Tensor clone() const;

    // Same storage, not tracked on any tape.
    Tensor detached() const;

    bool all_finite() const;

    int node() const { return node_; }
    void set_node(int id) { node_ = id; }

private:
    Shape shape_{};
    std::shared_ptr<std::vector<float>> store_;
    int node_ = -1;
};

// Elementwise in-place accumulation, shapes must match.
void accumulate(Tensor& dst, const Tensor& src);

} // namespace ffcvsr
