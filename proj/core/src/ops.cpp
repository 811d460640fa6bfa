#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "ffcvsr/autograd.hpp"
#include "ffcvsr/error.hpp"

// Forward and backward kernels for the differentiable operations. All loops
// write disjoint output ranges in a fixed order, so results are deterministic.

namespace ffcvsr {

namespace {

bool recording(std::initializer_list<const Tensor*> inputs) {
    if (GradientTape::active() == nullptr)
        return false;
    for (const Tensor* t : inputs)
        if (t->node() >= 0)
            return true;
    return false;
}

// Copies (n,c,h,w) planes into a zero-padded (h+2p, w+2p) layout.
std::vector<float> pad_planes(const float* src, int64_t planes, int64_t h, int64_t w, int64_t p) {
    const int64_t hp = h + 2 * p, wp = w + 2 * p;
    std::vector<float> out(static_cast<size_t>(planes * hp * wp), 0.0f);
    for (int64_t pl = 0; pl < planes; ++pl) {
        const float* s = src + pl * h * w;
        float* d = out.data() + pl * hp * wp + p * wp + p;
        for (int64_t y = 0; y < h; ++y)
            std::memcpy(d + y * wp, s + y * w, static_cast<size_t>(w) * sizeof(float));
    }
    return out;
}

void crop_planes(const float* padded, float* dst, int64_t planes, int64_t h, int64_t w, int64_t p) {
    const int64_t hp = h + 2 * p, wp = w + 2 * p;
    for (int64_t pl = 0; pl < planes; ++pl) {
        const float* s = padded + pl * hp * wp + p * wp + p;
        float* d = dst + pl * h * w;
        for (int64_t y = 0; y < h; ++y)
            std::memcpy(d + y * w, s + y * wp, static_cast<size_t>(w) * sizeof(float));
    }
}

struct ConvDims {
    int64_t n, in_c, h, w;
    int64_t out_c, kh, kw;
    int64_t stride, pad;
    int64_t out_h, out_w;
    int64_t hp, wp; // padded input extents
};

ConvDims conv_dims(const Shape& in, const Shape& weights, int stride, int pad) {
    ConvDims d;
    d.n = in.n;
    d.in_c = in.c;
    d.h = in.h;
    d.w = in.w;
    d.out_c = weights.n;
    d.kh = weights.h;
    d.kw = weights.w;
    d.stride = stride;
    d.pad = pad;
    d.out_h = (in.h + 2 * pad - weights.h) / stride + 1;
    d.out_w = (in.w + 2 * pad - weights.w) / stride + 1;
    d.hp = in.h + 2 * pad;
    d.wp = in.w + 2 * pad;
    return d;
}

void conv2d_forward(const ConvDims& d, const std::vector<float>& padded, const float* w,
                    const float* bias, float* out) {
    for (int64_t b = 0; b < d.n; ++b) {
        for (int64_t oc = 0; oc < d.out_c; ++oc) {
            float* out_plane = out + (b * d.out_c + oc) * d.out_h * d.out_w;
            const float bv = bias[oc];
            for (int64_t i = 0; i < d.out_h * d.out_w; ++i)
                out_plane[i] = bv;
            for (int64_t ic = 0; ic < d.in_c; ++ic) {
                const float* in_plane = padded.data() + (b * d.in_c + ic) * d.hp * d.wp;
                const float* wb = w + ((oc * d.in_c + ic) * d.kh) * d.kw;
                for (int64_t ky = 0; ky < d.kh; ++ky) {
                    for (int64_t kx = 0; kx < d.kw; ++kx) {
                        const float wv = wb[ky * d.kw + kx];
                        for (int64_t oh = 0; oh < d.out_h; ++oh) {
                            const float* src = in_plane + (oh * d.stride + ky) * d.wp + kx;
                            float* dst = out_plane + oh * d.out_w;
                            if (d.stride == 1) {
                                for (int64_t ow = 0; ow < d.out_w; ++ow)
                                    dst[ow] += wv * src[ow];
                            } else {
                                for (int64_t ow = 0; ow < d.out_w; ++ow)
                                    dst[ow] += wv * src[ow * d.stride];
                            }
                        }
                    }
                }
            }
        }
    }
}

Tensor conv2d_grad_input(const ConvDims& d, const float* w, const Tensor& grad_out) {
    std::vector<float> gpad(static_cast<size_t>(d.n * d.in_c * d.hp * d.wp), 0.0f);
    const float* go = grad_out.data();
    for (int64_t b = 0; b < d.n; ++b) {
        for (int64_t ic = 0; ic < d.in_c; ++ic) {
            float* gp = gpad.data() + (b * d.in_c + ic) * d.hp * d.wp;
            for (int64_t oc = 0; oc < d.out_c; ++oc) {
                const float* g_plane = go + (b * d.out_c + oc) * d.out_h * d.out_w;
                const float* wb = w + ((oc * d.in_c + ic) * d.kh) * d.kw;
                for (int64_t ky = 0; ky < d.kh; ++ky) {
                    for (int64_t kx = 0; kx < d.kw; ++kx) {
                        const float wv = wb[ky * d.kw + kx];
                        for (int64_t oh = 0; oh < d.out_h; ++oh) {
                            float* dst = gp + (oh * d.stride + ky) * d.wp + kx;
                            const float* src = g_plane + oh * d.out_w;
                            if (d.stride == 1) {
                                for (int64_t ow = 0; ow < d.out_w; ++ow)
                                    dst[ow] += wv * src[ow];
                            } else {
                                for (int64_t ow = 0; ow < d.out_w; ++ow)
                                    dst[ow * d.stride] += wv * src[ow];
                            }
                        }
                    }
                }
            }
        }
    }
    Tensor grad_in = Tensor::zeros(Shape{d.n, d.in_c, d.h, d.w});
    crop_planes(gpad.data(), grad_in.data(), d.n * d.in_c, d.h, d.w, d.pad);
    return grad_in;
}

Tensor conv2d_grad_weights(const ConvDims& d, const std::vector<float>& padded,
                           const Tensor& grad_out) {
    Tensor gw = Tensor::zeros(Shape{d.out_c, d.in_c, d.kh, d.kw});
    float* g = gw.data();
    const float* go = grad_out.data();
    for (int64_t b = 0; b < d.n; ++b) {
        for (int64_t oc = 0; oc < d.out_c; ++oc) {
            const float* g_plane = go + (b * d.out_c + oc) * d.out_h * d.out_w;
            for (int64_t ic = 0; ic < d.in_c; ++ic) {
                const float* in_plane = padded.data() + (b * d.in_c + ic) * d.hp * d.wp;
                for (int64_t ky = 0; ky < d.kh; ++ky) {
                    for (int64_t kx = 0; kx < d.kw; ++kx) {
                        float acc = 0.0f;
                        for (int64_t oh = 0; oh < d.out_h; ++oh) {
                            const float* src = in_plane + (oh * d.stride + ky) * d.wp + kx;
                            const float* gr = g_plane + oh * d.out_w;
                            if (d.stride == 1) {
                                for (int64_t ow = 0; ow < d.out_w; ++ow)
                                    acc += gr[ow] * src[ow];
                            } else {
                                for (int64_t ow = 0; ow < d.out_w; ++ow)
                                    acc += gr[ow] * src[ow * d.stride];
                            }
                        }
                        g[((oc * d.in_c + ic) * d.kh + ky) * d.kw + kx] += acc;
                    }
                }
            }
        }
    }
    return gw;
}

Tensor grad_bias_sum(const Tensor& grad_out) {
    const Shape& s = grad_out.shape();
    Tensor gb = Tensor::zeros(Shape{1, s.c, 1, 1});
    float* g = gb.data();
    const float* go = grad_out.data();
    for (int64_t b = 0; b < s.n; ++b)
        for (int64_t c = 0; c < s.c; ++c) {
            const float* plane = go + (b * s.c + c) * s.h * s.w;
            float acc = 0.0f;
            for (int64_t i = 0; i < s.h * s.w; ++i)
                acc += plane[i];
            g[c] += acc;
        }
    return gb;
}

struct DeconvDims {
    int64_t n, in_c, h, w;
    int64_t out_c, kh, kw;
    int64_t stride, pad;
    int64_t out_h, out_w;
    int64_t hop, wop; // padded output extents
};

DeconvDims deconv_dims(const Shape& in, const Shape& weights, int stride, int pad) {
    DeconvDims d;
    d.n = in.n;
    d.in_c = in.c;
    d.h = in.h;
    d.w = in.w;
    d.out_c = weights.c;
    d.kh = weights.h;
    d.kw = weights.w;
    d.stride = stride;
    d.pad = pad;
    d.out_h = (in.h - 1) * stride + weights.h - 2 * pad;
    d.out_w = (in.w - 1) * stride + weights.w - 2 * pad;
    d.hop = d.out_h + 2 * pad;
    d.wop = d.out_w + 2 * pad;
    return d;
}

void deconv_forward(const DeconvDims& d, const float* in, const float* w, const float* bias,
                    float* out) {
    std::vector<float> buf(static_cast<size_t>(d.n * d.out_c * d.hop * d.wop), 0.0f);
    for (int64_t b = 0; b < d.n; ++b) {
        for (int64_t oc = 0; oc < d.out_c; ++oc) {
            float* buf_plane = buf.data() + (b * d.out_c + oc) * d.hop * d.wop;
            for (int64_t ic = 0; ic < d.in_c; ++ic) {
                const float* in_plane = in + (b * d.in_c + ic) * d.h * d.w;
                const float* wb = w + ((ic * d.out_c + oc) * d.kh) * d.kw;
                for (int64_t ky = 0; ky < d.kh; ++ky) {
                    for (int64_t kx = 0; kx < d.kw; ++kx) {
                        const float wv = wb[ky * d.kw + kx];
                        for (int64_t ih = 0; ih < d.h; ++ih) {
                            const float* src = in_plane + ih * d.w;
                            float* dst = buf_plane + (ih * d.stride + ky) * d.wop + kx;
                            for (int64_t iw = 0; iw < d.w; ++iw)
                                dst[iw * d.stride] += wv * src[iw];
                        }
                    }
                }
            }
        }
    }
    crop_planes(buf.data(), out, d.n * d.out_c, d.out_h, d.out_w, d.pad);
    for (int64_t b = 0; b < d.n; ++b)
        for (int64_t oc = 0; oc < d.out_c; ++oc) {
            float* plane = out + (b * d.out_c + oc) * d.out_h * d.out_w;
            const float bv = bias[oc];
            for (int64_t i = 0; i < d.out_h * d.out_w; ++i)
                plane[i] += bv;
        }
}

Tensor deconv_grad_input(const DeconvDims& d, const float* w, const Tensor& grad_out) {
    std::vector<float> gpad =
        pad_planes(grad_out.data(), d.n * d.out_c, d.out_h, d.out_w, d.pad);
    Tensor grad_in = Tensor::zeros(Shape{d.n, d.in_c, d.h, d.w});
    float* gi = grad_in.data();
    for (int64_t b = 0; b < d.n; ++b) {
        for (int64_t ic = 0; ic < d.in_c; ++ic) {
            float* gin_plane = gi + (b * d.in_c + ic) * d.h * d.w;
            for (int64_t oc = 0; oc < d.out_c; ++oc) {
                const float* gp = gpad.data() + (b * d.out_c + oc) * d.hop * d.wop;
                const float* wb = w + ((ic * d.out_c + oc) * d.kh) * d.kw;
                for (int64_t ky = 0; ky < d.kh; ++ky) {
                    for (int64_t kx = 0; kx < d.kw; ++kx) {
                        const float wv = wb[ky * d.kw + kx];
                        for (int64_t ih = 0; ih < d.h; ++ih) {
                            const float* src = gp + (ih * d.stride + ky) * d.wop + kx;
                            float* dst = gin_plane + ih * d.w;
                            for (int64_t iw = 0; iw < d.w; ++iw)
                                dst[iw] += wv * src[iw * d.stride];
                        }
                    }
                }
            }
        }
    }
    return grad_in;
}

Tensor deconv_grad_weights(const DeconvDims& d, const float* in, const Tensor& grad_out) {
    std::vector<float> gpad =
        pad_planes(grad_out.data(), d.n * d.out_c, d.out_h, d.out_w, d.pad);
    Tensor gw = Tensor::zeros(Shape{d.in_c, d.out_c, d.kh, d.kw});
    float* g = gw.data();
    for (int64_t b = 0; b < d.n; ++b) {
        for (int64_t ic = 0; ic < d.in_c; ++ic) {
            const float* in_plane = in + (b * d.in_c + ic) * d.h * d.w;
            for (int64_t oc = 0; oc < d.out_c; ++oc) {
                const float* gp = gpad.data() + (b * d.out_c + oc) * d.hop * d.wop;
                for (int64_t ky = 0; ky < d.kh; ++ky) {
                    for (int64_t kx = 0; kx < d.kw; ++kx) {
                        float acc = 0.0f;
                        for (int64_t ih = 0; ih < d.h; ++ih) {
                            const float* src = in_plane + ih * d.w;
                            const float* gr = gp + (ih * d.stride + ky) * d.wop + kx;
                            for (int64_t iw = 0; iw < d.w; ++iw)
                                acc += src[iw] * gr[iw * d.stride];
                        }
                        g[((ic * d.out_c + oc) * d.kh + ky) * d.kw + kx] += acc;
                    }
                }
            }
        }
    }
    return gw;
}

Tensor s2d_impl(const Tensor& in, int64_t block) {
    const Shape& s = in.shape();
    const int64_t b2 = block * block;
    const Shape os{s.n, s.c * b2, s.h / block, s.w / block};
    Tensor out = Tensor::zeros(os);
    float* o = out.data();
    const float* src = in.data();
    for (int64_t b = 0; b < s.n; ++b) {
        for (int64_t oc = 0; oc < os.c; ++oc) {
            const int64_t c = oc / b2;
            const int64_t by = (oc % b2) / block;
            const int64_t bx = oc % block;
            const float* in_plane = src + (b * s.c + c) * s.h * s.w;
            float* out_plane = o + (b * os.c + oc) * os.h * os.w;
            for (int64_t y = 0; y < os.h; ++y)
                for (int64_t x = 0; x < os.w; ++x)
                    out_plane[y * os.w + x] = in_plane[(y * block + by) * s.w + (x * block + bx)];
        }
    }
    return out;
}

Tensor d2s_impl(const Tensor& in, int64_t block) {
    const Shape& s = in.shape();
    const int64_t b2 = block * block;
    const Shape os{s.n, s.c / b2, s.h * block, s.w * block};
    Tensor out = Tensor::zeros(os);
    float* o = out.data();
    const float* src = in.data();
    for (int64_t b = 0; b < s.n; ++b) {
        for (int64_t c = 0; c < os.c; ++c) {
            float* out_plane = o + (b * os.c + c) * os.h * os.w;
            for (int64_t y = 0; y < os.h; ++y) {
                for (int64_t x = 0; x < os.w; ++x) {
                    const int64_t ic = c * b2 + (y % block) * block + (x % block);
                    out_plane[y * os.w + x] =
                        src[((b * s.c + ic) * s.h + y / block) * s.w + x / block];
                }
            }
        }
    }
    return out;
}

} // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
              int padding) {
    check(input.defined() && weights.defined() && bias.defined(), "conv2d: undefined argument");
    check(stride >= 1, "conv2d: stride must be positive, got ", stride);
    check(padding >= 0, "conv2d: padding must be non-negative, got ", padding);
    check(input.shape().c == weights.shape().c, "conv2d: input has ", input.shape().c,
          " channels but weights expect ", weights.shape().c, " (weights ",
          weights.shape().str(), ")");
    check(bias.shape() == Shape{1, weights.shape().n, 1, 1}, "conv2d: bias shape ",
          bias.shape().str(), " does not match ", weights.shape().n, " output channels");

    const ConvDims d = conv_dims(input.shape(), weights.shape(), stride, padding);
    check(d.out_h >= 1 && d.out_w >= 1, "conv2d: kernel ", weights.shape().h, "x",
          weights.shape().w, " with stride ", stride, ", padding ", padding,
          " yields empty output for input ", input.shape().str());

    std::vector<float> padded =
        pad_planes(input.data(), d.n * d.in_c, d.h, d.w, d.pad);
    Tensor out = Tensor::zeros(Shape{d.n, d.out_c, d.out_h, d.out_w});
    conv2d_forward(d, padded, weights.data(), bias.data(), out.data());

    if (recording({&input, &weights, &bias})) {
        const bool need_input = input.node() >= 0;
        const bool need_weights = weights.node() >= 0;
        const bool need_bias = bias.node() >= 0;
        Tensor w_saved = weights;
        auto saved_pad = std::make_shared<std::vector<float>>(std::move(padded));
        const int out_node = GradientTape::active()->record(
            {input.node(), weights.node(), bias.node()}, out.shape(),
            [=](const Tensor& grad_out) {
                std::vector<Tensor> grads(3);
                if (need_input)
                    grads[0] = conv2d_grad_input(d, w_saved.data(), grad_out);
                if (need_weights)
                    grads[1] = conv2d_grad_weights(d, *saved_pad, grad_out);
                if (need_bias)
                    grads[2] = grad_bias_sum(grad_out);
                return grads;
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor conv2d_transpose(const Tensor& input, const Tensor& weights, const Tensor& bias, int stride,
                        int padding) {
    check(input.defined() && weights.defined() && bias.defined(),
          "conv2d_transpose: undefined argument");
    check(stride >= 1, "conv2d_transpose: stride must be positive, got ", stride);
    check(padding >= 0, "conv2d_transpose: padding must be non-negative, got ", padding);
    check(input.shape().c == weights.shape().n, "conv2d_transpose: input has ", input.shape().c,
          " channels but weights expect ", weights.shape().n, " (weights ",
          weights.shape().str(), ")");
    check(bias.shape() == Shape{1, weights.shape().c, 1, 1}, "conv2d_transpose: bias shape ",
          bias.shape().str(), " does not match ", weights.shape().c, " output channels");

    const DeconvDims d = deconv_dims(input.shape(), weights.shape(), stride, padding);
    check(d.out_h >= 1 && d.out_w >= 1, "conv2d_transpose: kernel ", d.kh, "x", d.kw,
          " with stride ", stride, ", padding ", padding, " yields empty output for input ",
          input.shape().str());

    Tensor out = Tensor::zeros(Shape{d.n, d.out_c, d.out_h, d.out_w});
    deconv_forward(d, input.data(), weights.data(), bias.data(), out.data());

    if (recording({&input, &weights, &bias})) {
        const bool need_input = input.node() >= 0;
        const bool need_weights = weights.node() >= 0;
        const bool need_bias = bias.node() >= 0;
        Tensor in_saved = input, w_saved = weights;
        const int out_node = GradientTape::active()->record(
            {input.node(), weights.node(), bias.node()}, out.shape(),
            [=](const Tensor& grad_out) {
                std::vector<Tensor> grads(3);
                if (need_input)
                    grads[0] = deconv_grad_input(d, w_saved.data(), grad_out);
                if (need_weights)
                    grads[1] = deconv_grad_weights(d, in_saved.data(), grad_out);
                if (need_bias)
                    grads[2] = grad_bias_sum(grad_out);
                return grads;
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor space_to_depth(const Tensor& input, int block) {
    check(input.defined(), "space_to_depth: undefined input");
    check(block >= 1, "space_to_depth: block must be positive, got ", block);
    check(input.shape().h % block == 0, "space_to_depth: height ", input.shape().h,
          " not divisible by block ", block);
    check(input.shape().w % block == 0, "space_to_depth: width ", input.shape().w,
          " not divisible by block ", block);

    Tensor out = s2d_impl(input, block);
    if (recording({&input})) {
        const int out_node = GradientTape::active()->record(
            {input.node()}, out.shape(), [block](const Tensor& grad_out) {
                return std::vector<Tensor>{d2s_impl(grad_out, block)};
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor depth_to_space(const Tensor& input, int block) {
    check(input.defined(), "depth_to_space: undefined input");
    check(block >= 1, "depth_to_space: block must be positive, got ", block);
    check(input.shape().c % (static_cast<int64_t>(block) * block) == 0,
          "depth_to_space: channels ", input.shape().c, " not divisible by block^2 = ",
          static_cast<int64_t>(block) * block);

    Tensor out = d2s_impl(input, block);
    if (recording({&input})) {
        const int out_node = GradientTape::active()->record(
            {input.node()}, out.shape(), [block](const Tensor& grad_out) {
                return std::vector<Tensor>{s2d_impl(grad_out, block)};
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor relu(const Tensor& input) {
    check(input.defined(), "relu: undefined input");
    Tensor out = Tensor::zeros(input.shape());
    const float* s = input.data();
    float* o = out.data();
    const int64_t count = input.numel();
    for (int64_t i = 0; i < count; ++i)
        o[i] = s[i] > 0.0f ? s[i] : 0.0f;

    if (recording({&input})) {
        Tensor in_saved = input;
        const int out_node = GradientTape::active()->record(
            {input.node()}, out.shape(), [in_saved](const Tensor& grad_out) {
                Tensor g = Tensor::zeros(grad_out.shape());
                const float* x = in_saved.data();
                const float* go = grad_out.data();
                float* gd = g.data();
                const int64_t count = g.numel();
                for (int64_t i = 0; i < count; ++i)
                    gd[i] = x[i] > 0.0f ? go[i] : 0.0f;
                return std::vector<Tensor>{g};
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check(a.defined() && b.defined(), "add: undefined argument");
    check(a.shape() == b.shape(), "add: shape mismatch ", a.shape().str(), " vs ",
          b.shape().str());
    Tensor out = Tensor::zeros(a.shape());
    const float* pa = a.data();
    const float* pb = b.data();
    float* o = out.data();
    const int64_t count = a.numel();
    for (int64_t i = 0; i < count; ++i)
        o[i] = pa[i] + pb[i];

    if (recording({&a, &b})) {
        const int out_node = GradientTape::active()->record(
            {a.node(), b.node()}, out.shape(), [](const Tensor& grad_out) {
                return std::vector<Tensor>{grad_out, grad_out};
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
    check(!parts.empty(), "concat_channels: no inputs");
    const Shape& first = parts.front().shape();
    int64_t total_c = 0;
    for (size_t i = 0; i < parts.size(); ++i) {
        check(parts[i].defined(), "concat_channels: undefined input at position ", i);
        const Shape& s = parts[i].shape();
        check(s.n == first.n && s.h == first.h && s.w == first.w,
              "concat_channels: part ", i, " has shape ", s.str(),
              " incompatible with first part ", first.str());
        total_c += s.c;
    }

    Tensor out = Tensor::zeros(Shape{first.n, total_c, first.h, first.w});
    const int64_t plane = first.h * first.w;
    float* o = out.data();
    for (int64_t b = 0; b < first.n; ++b) {
        int64_t c_off = 0;
        for (const Tensor& part : parts) {
            const int64_t pc = part.shape().c;
            std::memcpy(o + (b * total_c + c_off) * plane,
                        part.data() + b * pc * plane,
                        static_cast<size_t>(pc * plane) * sizeof(float));
            c_off += pc;
        }
    }

    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts)
        ptrs.push_back(&p);
    if (GradientTape::active() != nullptr &&
        std::any_of(ptrs.begin(), ptrs.end(), [](const Tensor* t) { return t->node() >= 0; })) {
        std::vector<int> nodes;
        std::vector<Shape> shapes;
        for (const Tensor& p : parts) {
            nodes.push_back(p.node());
            shapes.push_back(p.shape());
        }
        const int out_node = GradientTape::active()->record(
            nodes, out.shape(), [shapes, plane, total_c](const Tensor& grad_out) {
                std::vector<Tensor> grads;
                grads.reserve(shapes.size());
                int64_t c_off = 0;
                for (const Shape& s : shapes) {
                    Tensor g = Tensor::zeros(s);
                    for (int64_t b = 0; b < s.n; ++b)
                        std::memcpy(g.data() + b * s.c * plane,
                                    grad_out.data() + (b * total_c + c_off) * plane,
                                    static_cast<size_t>(s.c * plane) * sizeof(float));
                    grads.push_back(std::move(g));
                    c_off += s.c;
                }
                return grads;
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor mul_scalar(const Tensor& input, float factor) {
    check(input.defined(), "mul_scalar: undefined input");
    Tensor out = Tensor::zeros(input.shape());
    const float* s = input.data();
    float* o = out.data();
    const int64_t count = input.numel();
    for (int64_t i = 0; i < count; ++i)
        o[i] = s[i] * factor;

    if (recording({&input})) {
        const int out_node = GradientTape::active()->record(
            {input.node()}, out.shape(), [factor](const Tensor& grad_out) {
                Tensor g = Tensor::zeros(grad_out.shape());
                const float* go = grad_out.data();
                float* gd = g.data();
                const int64_t count = g.numel();
                for (int64_t i = 0; i < count; ++i)
                    gd[i] = go[i] * factor;
                return std::vector<Tensor>{g};
            });
        out.set_node(out_node);
    }
    return out;
}

Tensor mse(const Tensor& a, const Tensor& b) {
    check(a.defined() && b.defined(), "mse: undefined argument");
    check(a.shape() == b.shape(), "mse: shape mismatch ", a.shape().str(), " vs ",
          b.shape().str());
    const int64_t count = a.numel();
    check(count > 0, "mse: empty tensors");

    const float* pa = a.data();
    const float* pb = b.data();
    double sum = 0.0;
    for (int64_t i = 0; i < count; ++i) {
        const double diff = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
        sum += diff * diff;
    }
    Tensor out = Tensor::full(Shape{1, 1, 1, 1}, static_cast<float>(sum / count));

    if (recording({&a, &b})) {
        Tensor a_saved = a, b_saved = b;
        const int out_node = GradientTape::active()->record(
            {a.node(), b.node()}, out.shape(), [a_saved, b_saved, count](const Tensor& grad_out) {
                const float scale = 2.0f / static_cast<float>(count) * grad_out.item();
                Tensor ga = Tensor::zeros(a_saved.shape());
                Tensor gb = Tensor::zeros(b_saved.shape());
                const float* x = a_saved.data();
                const float* y = b_saved.data();
                float* gda = ga.data();
                float* gdb = gb.data();
                for (int64_t i = 0; i < count; ++i) {
                    const float d = scale * (x[i] - y[i]);
                    gda[i] = d;
                    gdb[i] = -d;
                }
                return std::vector<Tensor>{ga, gb};
            });
        out.set_node(out_node);
    }
    return out;
}

} // namespace ffcvsr
