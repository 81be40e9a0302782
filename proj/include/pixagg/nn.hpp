#pragma once

#include <vector>

#include "pixagg/tensor.hpp"

namespace pixagg {

// 3x3 convolution layer, stride 1, zero "same" padding. Feature maps are
// stored [channels, height, width].
struct ConvLayer {
    Tensor kernel; // [out_c, in_c, 3, 3]
    Tensor bias;   // [out_c]

    ConvLayer() = default;
    ConvLayer(int in_c, int out_c);

    int in_channels() const { return kernel.dim(1); }
    int out_channels() const { return kernel.dim(0); }

    // Fan-in-scaled uniform init, biases zero.
    void init(Rng& rng);
};

Tensor conv2d_forward(const Tensor& x, const ConvLayer& layer);

struct ConvGrads {
    Tensor grad_x;
    Tensor grad_kernel;
    Tensor grad_bias;
};
ConvGrads conv2d_backward(const Tensor& x, const ConvLayer& layer, const Tensor& upstream);

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& x, const Tensor& upstream);
Tensor tanh_forward(const Tensor& x);
// Takes the forward output, not the input.
Tensor tanh_backward(const Tensor& y, const Tensor& upstream);

// 2x average pooling / nearest-neighbor upsampling on [c, h, w] maps.
Tensor avgpool2_forward(const Tensor& x);
Tensor avgpool2_backward(const Tensor& upstream);
Tensor upsample2_forward(const Tensor& x);
Tensor upsample2_backward(const Tensor& upstream);

// Channel-axis concat of [c, h, w] maps.
Tensor concat_channels(const std::vector<const Tensor*>& parts);

// Adam with bias correction; moments allocated lazily to match parameters.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr = 2e-4;
    double lr_decay = 0.999991; // applied once per epoch until lr_floor
    double lr_floor = 1e-4;
    std::int64_t step_count = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    // One update over a parameter list and matching gradient list.
    void step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads);
    void decay_epoch();
};

} // namespace pixagg
