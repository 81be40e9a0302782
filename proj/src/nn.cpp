#include "pixagg/nn.hpp"

#include <algorithm>
#include <cmath>

namespace pixagg {

ConvLayer::ConvLayer(int in_c, int out_c)
    : kernel({out_c, in_c, 3, 3}), bias({out_c}) {}

void ConvLayer::init(Rng& rng) {
    const double bound = std::sqrt(1.0 / (in_channels() * 9.0));
    for (std::int64_t i = 0; i < kernel.size(); ++i) {
        kernel[i] = static_cast<float>(rng.uniform(-bound, bound));
    }
    for (std::int64_t i = 0; i < bias.size(); ++i) bias[i] = 0.0f;
}

namespace {

void check_conv_input(const Tensor& x, const ConvLayer& layer) {
    if (x.rank() != 3) throw ShapeError("conv input must be [c, h, w]");
    if (x.dim(0) != layer.in_channels()) {
        throw ShapeError("conv input channel mismatch");
    }
}

} // namespace

Tensor conv2d_forward(const Tensor& x, const ConvLayer& layer) {
    check_conv_input(x, layer);
    const int ic = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int oc = layer.out_channels();
    Tensor y({oc, h, w});
    for (int o = 0; o < oc; ++o) {
        const float b = layer.bias[o];
        for (int u = 0; u < h; ++u) {
            const int a_lo = std::max(0, 1 - u), a_hi = std::min(2, h - u);
            for (int v = 0; v < w; ++v) {
                const int b_lo = std::max(0, 1 - v), b_hi = std::min(2, w - v);
                double acc = b;
                for (int c = 0; c < ic; ++c) {
                    for (int a = a_lo; a <= a_hi; ++a) {
                        const float* xrow = x.data() +
                            (static_cast<std::int64_t>(c) * h + (u + a - 1)) * w + (v - 1);
                        const float* krow = layer.kernel.data() +
                            ((static_cast<std::int64_t>(o) * ic + c) * 3 + a) * 3;
                        for (int bb = b_lo; bb <= b_hi; ++bb) {
                            acc += static_cast<double>(xrow[bb]) * krow[bb];
                        }
                    }
                }
                y.at(o, u, v) = static_cast<float>(acc);
            }
        }
    }
    return y;
}

ConvGrads conv2d_backward(const Tensor& x, const ConvLayer& layer, const Tensor& upstream) {
    check_conv_input(x, layer);
    const int ic = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int oc = layer.out_channels();
    if (upstream.rank() != 3 || upstream.dim(0) != oc || upstream.dim(1) != h ||
        upstream.dim(2) != w) {
        throw ShapeError("conv upstream gradient shape mismatch");
    }
    ConvGrads g{Tensor(x.shape()), Tensor(layer.kernel.shape()), Tensor(layer.bias.shape())};
    for (int o = 0; o < oc; ++o) {
        double bias_acc = 0.0;
        for (int u = 0; u < h; ++u) {
            const int a_lo = std::max(0, 1 - u), a_hi = std::min(2, h - u);
            for (int v = 0; v < w; ++v) {
                const float up = upstream.at(o, u, v);
                bias_acc += up;
                if (up == 0.0f) continue;
                const int b_lo = std::max(0, 1 - v), b_hi = std::min(2, w - v);
                for (int c = 0; c < ic; ++c) {
                    for (int a = a_lo; a <= a_hi; ++a) {
                        float* gxrow = g.grad_x.data() +
                            (static_cast<std::int64_t>(c) * h + (u + a - 1)) * w + (v - 1);
                        const float* xrow = x.data() +
                            (static_cast<std::int64_t>(c) * h + (u + a - 1)) * w + (v - 1);
                        const std::int64_t koff = ((static_cast<std::int64_t>(o) * ic + c) * 3 + a) * 3;
                        const float* krow = layer.kernel.data() + koff;
                        float* gkrow = g.grad_kernel.data() + koff;
                        for (int bb = b_lo; bb <= b_hi; ++bb) {
                            gxrow[bb] += up * krow[bb];
                            gkrow[bb] += up * xrow[bb];
                        }
                    }
                }
            }
        }
        g.grad_bias[o] = static_cast<float>(bias_acc);
    }
    return g;
}

Tensor relu_forward(const Tensor& x) {
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
    return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& upstream) {
    if (!x.same_shape(upstream)) throw ShapeError("relu backward shape mismatch");
    Tensor g(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) g[i] = x[i] > 0.0f ? upstream[i] : 0.0f;
    return g;
}

Tensor tanh_forward(const Tensor& x) {
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
    return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& upstream) {
    if (!y.same_shape(upstream)) throw ShapeError("tanh backward shape mismatch");
    Tensor g(y.shape());
    for (std::int64_t i = 0; i < y.size(); ++i) g[i] = upstream[i] * (1.0f - y[i] * y[i]);
    return g;
}

Tensor avgpool2_forward(const Tensor& x) {
    if (x.rank() != 3 || x.dim(1) % 2 != 0 || x.dim(2) % 2 != 0) {
        throw ShapeError("avgpool2 needs [c, h, w] with even h and w");
    }
    const int c = x.dim(0), h = x.dim(1) / 2, w = x.dim(2) / 2;
    Tensor y({c, h, w});
    for (int ch = 0; ch < c; ++ch) {
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                y.at(ch, u, v) = 0.25f * (x.at(ch, 2 * u, 2 * v) + x.at(ch, 2 * u, 2 * v + 1) +
                                          x.at(ch, 2 * u + 1, 2 * v) + x.at(ch, 2 * u + 1, 2 * v + 1));
            }
        }
    }
    return y;
}

Tensor avgpool2_backward(const Tensor& upstream) {
    const int c = upstream.dim(0), h = upstream.dim(1), w = upstream.dim(2);
    Tensor g({c, h * 2, w * 2});
    for (int ch = 0; ch < c; ++ch) {
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                const float up = 0.25f * upstream.at(ch, u, v);
                g.at(ch, 2 * u, 2 * v) = up;
                g.at(ch, 2 * u, 2 * v + 1) = up;
                g.at(ch, 2 * u + 1, 2 * v) = up;
                g.at(ch, 2 * u + 1, 2 * v + 1) = up;
            }
        }
    }
    return g;
}

Tensor upsample2_forward(const Tensor& x) {
    if (x.rank() != 3) throw ShapeError("upsample2 needs [c, h, w]");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor y({c, h * 2, w * 2});
    for (int ch = 0; ch < c; ++ch) {
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                const float val = x.at(ch, u, v);
                y.at(ch, 2 * u, 2 * v) = val;
                y.at(ch, 2 * u, 2 * v + 1) = val;
                y.at(ch, 2 * u + 1, 2 * v) = val;
                y.at(ch, 2 * u + 1, 2 * v + 1) = val;
            }
        }
    }
    return y;
}

Tensor upsample2_backward(const Tensor& upstream) {
    if (upstream.rank() != 3 || upstream.dim(1) % 2 != 0 || upstream.dim(2) % 2 != 0) {
        throw ShapeError("upsample2 backward needs even spatial dims");
    }
    const int c = upstream.dim(0), h = upstream.dim(1) / 2, w = upstream.dim(2) / 2;
    Tensor g({c, h, w});
    for (int ch = 0; ch < c; ++ch) {
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                g.at(ch, u, v) = upstream.at(ch, 2 * u, 2 * v) + upstream.at(ch, 2 * u, 2 * v + 1) +
                                 upstream.at(ch, 2 * u + 1, 2 * v) +
                                 upstream.at(ch, 2 * u + 1, 2 * v + 1);
            }
        }
    }
    return g;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
    if (parts.empty()) throw ShapeError("concat of zero tensors");
    const int h = parts[0]->dim(1), w = parts[0]->dim(2);
    int c = 0;
    for (const Tensor* p : parts) {
        if (p->rank() != 3 || p->dim(1) != h || p->dim(2) != w) {
            throw ShapeError("concat spatial shape mismatch");
        }
        c += p->dim(0);
    }
    Tensor out({c, h, w});
    std::int64_t off = 0;
    for (const Tensor* p : parts) {
        std::copy(p->data(), p->data() + p->size(), out.data() + off);
        off += p->size();
    }
    return out;
}

void AdamState::step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) throw ShapeError("parameter/gradient count mismatch");
    if (m.empty()) {
        for (const Tensor* p : params) {
            m.emplace_back(p->shape());
            v.emplace_back(p->shape());
        }
    }
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = *params[pi];
        const Tensor& g = grads[pi];
        if (!p.same_shape(g)) throw ShapeError("gradient shape mismatch at parameter " +
                                               std::to_string(pi));
        for (std::int64_t i = 0; i < p.size(); ++i) {
            const double gi = g[i];
            const double mi = beta1 * m[pi][i] + (1.0 - beta1) * gi;
            const double vi = beta2 * v[pi][i] + (1.0 - beta2) * gi * gi;
            m[pi][i] = static_cast<float>(mi);
            v[pi][i] = static_cast<float>(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            p[i] = static_cast<float>(p[i] - lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

void AdamState::decay_epoch() {
    lr = std::max(lr * lr_decay, lr_floor);
}

} // namespace pixagg
