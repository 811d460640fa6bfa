#include "ffcvsr/tensor.hpp"

#include <cmath>
#include <sstream>

#include "ffcvsr/error.hpp"

namespace ffcvsr {

std::string Shape::str() const {
    std::ostringstream os;
    os << "[" << n << "," << c << "," << h << "," << w << "]";
    return os.str();
}

Tensor::Tensor(const Shape& shape) : shape_(shape) {
    check(shape.n >= 0 && shape.c >= 0 && shape.h >= 0 && shape.w >= 0,
          "tensor: negative extent in shape ", shape.str());
    store_ = std::make_shared<std::vector<float>>(static_cast<size_t>(shape.numel()), 0.0f);
}

Tensor Tensor::zeros(const Shape& shape) {
    return Tensor(shape);
}

Tensor Tensor::full(const Shape& shape, float value) {
    Tensor t(shape);
    std::fill(t.store_->begin(), t.store_->end(), value);
    return t;
}

Tensor Tensor::from_vector(const Shape& shape, std::vector<float> values) {
    check(static_cast<int64_t>(values.size()) == shape.numel(),
          "tensor: ", values.size(), " values do not fill shape ", shape.str());
    Tensor t;
    t.shape_ = shape;
    t.store_ = std::make_shared<std::vector<float>>(std::move(values));
    return t;
}

float Tensor::item() const {
    check(defined() && numel() == 1, "tensor: item() requires exactly one element, shape is ",
          shape_.str());
    return (*store_)[0];
}

Tensor Tensor::clone() const {
    if (!defined())
        return Tensor();
    Tensor t;
    t.shape_ = shape_;
    t.store_ = std::make_shared<std::vector<float>>(*store_);
    return t;
}

Tensor Tensor::detached() const {
    Tensor t = *this;
    t.node_ = -1;
    return t;
}

bool Tensor::all_finite() const {
    if (!defined())
        return true;
    for (float v : *store_)
        if (!std::isfinite(v))
            return false;
    return true;
}

void accumulate(Tensor& dst, const Tensor& src) {
    check(dst.shape() == src.shape(), "accumulate: shape mismatch ", dst.shape().str(), " vs ",
          src.shape().str());
    float* d = dst.data();
    const float* s = src.data();
    const int64_t n = dst.numel();
    for (int64_t i = 0; i < n; ++i)
        d[i] += s[i];
}

} // namespace ffcvsr
