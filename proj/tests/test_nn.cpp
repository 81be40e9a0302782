#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pixagg/nn.hpp"

using namespace pixagg;

namespace {

// Brute-force cross-correlation with zero padding, independent of the
// library implementation.
Tensor conv_oracle(const Tensor& x, const ConvLayer& layer) {
    const int c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int c_out = layer.out_channels();
    Tensor y({c_out, h, w});
    for (int oc = 0; oc < c_out; ++oc) {
        for (int u = 0; u < h; ++u) {
            for (int v = 0; v < w; ++v) {
                double acc = layer.bias[oc];
                for (int ic = 0; ic < c_in; ++ic) {
                    for (int ku = -1; ku <= 1; ++ku) {
                        for (int kv = -1; kv <= 1; ++kv) {
                            const int uu = u + ku, vv = v + kv;
                            if (uu < 0 || uu >= h || vv < 0 || vv >= w) continue;
                            acc += static_cast<double>(x.at(ic, uu, vv)) *
                                   layer.kernel.at(oc, ic, ku + 1, kv + 1);
                        }
                    }
                }
                y.at(oc, u, v) = static_cast<float>(acc);
            }
        }
    }
    return y;
}

double scalar_objective(const Tensor& y, const Tensor& upstream) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < y.size(); ++i) {
        acc += static_cast<double>(y[i]) * upstream[i];
    }
    return acc;
}

} // namespace

TEST_CASE("conv identity kernel") {
    Rng rng(1);
    const Tensor x = rng.randn({1, 6, 6});
    ConvLayer layer(1, 1);
    layer.kernel.at(0, 0, 1, 1) = 1.0f;
    const Tensor y = conv2d_forward(x, layer);
    for (std::int64_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("all-ones kernel on a constant image") {
    const Tensor x = Tensor::full({1, 6, 6}, 0.5f);
    ConvLayer layer(1, 1);
    for (std::int64_t i = 0; i < layer.kernel.size(); ++i) layer.kernel[i] = 1.0f;
    layer.bias[0] = 0.25f;
    const Tensor y = conv2d_forward(x, layer);
    for (int u = 1; u < 5; ++u) {
        for (int v = 1; v < 5; ++v) {
            CHECK(y.at(0, u, v) == doctest::Approx(9 * 0.5 + 0.25).epsilon(1e-6));
        }
    }
    // Corner sees only a 2x2 window.
    CHECK(y.at(0, 0, 0) == doctest::Approx(4 * 0.5 + 0.25).epsilon(1e-6));
}

TEST_CASE("conv matches the brute-force oracle") {
    Rng rng(2);
    for (int k = 0; k < 10; ++k) {
        const int c_in = 1 + static_cast<int>(rng.uniform_int(3));
        const int c_out = 1 + static_cast<int>(rng.uniform_int(3));
        const Tensor x = rng.randn({c_in, 5, 5});
        ConvLayer layer(c_in, c_out);
        layer.init(rng);
        layer.bias = rng.randn({c_out});
        const Tensor y = conv2d_forward(x, layer);
        const Tensor ref = conv_oracle(x, layer);
        for (std::int64_t i = 0; i < y.size(); ++i) {
            CHECK(std::abs(y[i] - ref[i]) < 1e-5);
        }
    }
}

TEST_CASE("conv rejects channel mismatch") {
    ConvLayer layer(2, 3);
    CHECK_THROWS_AS(conv2d_forward(Tensor({3, 4, 4}), layer), ShapeError);
    CHECK_THROWS_AS(conv2d_backward(Tensor({2, 4, 4}), layer, Tensor({2, 4, 4})), ShapeError);
}

TEST_CASE("conv backward trivial cases") {
    Rng rng(3);
    const Tensor x = rng.randn({2, 4, 4});
    ConvLayer layer(2, 3);
    layer.init(rng);
    SUBCASE("zero upstream gives zero gradients") {
        const ConvGrads g = conv2d_backward(x, layer, Tensor({3, 4, 4}));
        CHECK(reduce_sum(g.grad_x) == 0.0);
        CHECK(reduce_sum(g.grad_kernel) == 0.0);
        CHECK(reduce_sum(g.grad_bias) == 0.0);
    }
    SUBCASE("grad_bias is the per-channel upstream sum") {
        const Tensor up = rng.randn({3, 4, 4});
        const ConvGrads g = conv2d_backward(x, layer, up);
        for (int oc = 0; oc < 3; ++oc) {
            double s = 0.0;
            for (int u = 0; u < 4; ++u) {
                for (int v = 0; v < 4; ++v) s += up.at(oc, u, v);
            }
            CHECK(g.grad_bias[oc] == doctest::Approx(s).epsilon(1e-5));
        }
    }
}

TEST_CASE("conv backward matches finite differences") {
    Rng rng(4);
    const Tensor x = rng.randn({1, 4, 4});
    ConvLayer layer(1, 2);
    layer.init(rng);
    const Tensor up = rng.randn({2, 4, 4});
    const ConvGrads g = conv2d_backward(x, layer, up);
    const double eps = 1e-3;

    auto check_fd = [&](Tensor& param, const Tensor& grad) {
        for (std::int64_t idx = 0; idx < param.size(); ++idx) {
            const float save = param[idx];
            param[idx] = save + static_cast<float>(eps);
            const double fhi = scalar_objective(conv2d_forward(x, layer), up);
            param[idx] = save - static_cast<float>(eps);
            const double flo = scalar_objective(conv2d_forward(x, layer), up);
            param[idx] = save;
            const double fd = (fhi - flo) / (2.0 * eps);
            CHECK(std::abs(grad[idx] - fd) <= 1e-3 * std::max(std::abs(fd), 1.0));
        }
    };
    check_fd(layer.kernel, g.grad_kernel);
    check_fd(layer.bias, g.grad_bias);
    // grad_x via the same scheme.
    Tensor xm = x;
    for (std::int64_t idx = 0; idx < xm.size(); ++idx) {
        const float save = xm[idx];
        xm[idx] = save + static_cast<float>(eps);
        const double fhi = scalar_objective(conv2d_forward(xm, layer), up);
        xm[idx] = save - static_cast<float>(eps);
        const double flo = scalar_objective(conv2d_forward(xm, layer), up);
        xm[idx] = save;
        const double fd = (fhi - flo) / (2.0 * eps);
        CHECK(std::abs(g.grad_x[idx] - fd) <= 1e-3 * std::max(std::abs(fd), 1.0));
    }
}

TEST_CASE("relu forward and backward") {
    const Tensor x = Tensor::from_values({5}, {-2, -0.5f, 0, 0.5f, 2});
    const Tensor y = relu_forward(x);
    CHECK(y[0] == 0.0f);
    CHECK(y[1] == 0.0f);
    CHECK(y[2] == 0.0f);
    CHECK(y[3] == 0.5f);
    CHECK(y[4] == 2.0f);
    const Tensor up = Tensor::full({5}, 1.0f);
    const Tensor g = relu_backward(x, up);
    CHECK(g[0] == 0.0f);
    CHECK(g[3] == 1.0f);
    CHECK(g[4] == 1.0f);
}

TEST_CASE("tanh forward and backward") {
    const Tensor x = Tensor::from_values({3}, {-1, 0, 1});
    const Tensor y = tanh_forward(x);
    CHECK(y[0] == doctest::Approx(std::tanh(-1.0)));
    CHECK(y[1] == 0.0f);
    CHECK(y[2] == doctest::Approx(std::tanh(1.0)));
    const Tensor up = Tensor::full({3}, 1.0f);
    const Tensor g = tanh_backward(y, up);
    for (int i = 0; i < 3; ++i) {
        CHECK(g[i] == doctest::Approx(1.0 - std::tanh(static_cast<double>(x[i])) *
                                                std::tanh(static_cast<double>(x[i])))
                          .epsilon(1e-5));
    }
}

TEST_CASE("avgpool and upsample") {
    const Tensor x = Tensor::from_values({1, 2, 2}, {1, 2, 3, 4});
    const Tensor p = avgpool2_forward(x);
    CHECK(p.shape() == std::vector<int>{1, 1, 1});
    CHECK(p[0] == doctest::Approx(2.5));

    const Tensor u = upsample2_forward(p);
    CHECK(u.shape() == std::vector<int>{1, 2, 2});
    for (int i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(2.5));

    // Backward passes are each other's transposes up to the 1/4 factor.
    const Tensor gb = avgpool2_backward(Tensor::full({1, 1, 1}, 1.0f));
    for (int i = 0; i < 4; ++i) CHECK(gb[i] == doctest::Approx(0.25));
    const Tensor ub = upsample2_backward(Tensor::from_values({1, 2, 2}, {1, 2, 3, 4}));
    CHECK(ub[0] == doctest::Approx(10.0));

    CHECK_THROWS_AS(avgpool2_forward(Tensor({1, 3, 4})), ShapeError);
}

TEST_CASE("pool/upsample backward match finite differences") {
    Rng rng(9);
    const Tensor x = rng.randn({2, 4, 4});
    const Tensor up_pool = rng.randn({2, 2, 2});
    const Tensor g = avgpool2_backward(up_pool);
    const double eps = 1e-3;
    for (std::int64_t idx = 0; idx < x.size(); ++idx) {
        Tensor lo = x, hi = x;
        lo[idx] -= static_cast<float>(eps);
        hi[idx] += static_cast<float>(eps);
        const double fd = (scalar_objective(avgpool2_forward(hi), up_pool) -
                           scalar_objective(avgpool2_forward(lo), up_pool)) / (2.0 * eps);
        CHECK(g[idx] == doctest::Approx(fd).epsilon(1e-3));
    }
    const Tensor small = rng.randn({2, 2, 2});
    const Tensor up_up = rng.randn({2, 4, 4});
    const Tensor gu = upsample2_backward(up_up);
    for (std::int64_t idx = 0; idx < small.size(); ++idx) {
        Tensor lo = small, hi = small;
        lo[idx] -= static_cast<float>(eps);
        hi[idx] += static_cast<float>(eps);
        const double fd = (scalar_objective(upsample2_forward(hi), up_up) -
                           scalar_objective(upsample2_forward(lo), up_up)) / (2.0 * eps);
        CHECK(gu[idx] == doctest::Approx(fd).epsilon(1e-3));
    }
}

TEST_CASE("concat_channels") {
    const Tensor a = Tensor::full({2, 3, 3}, 1.0f);
    const Tensor b = Tensor::full({1, 3, 3}, 2.0f);
    const Tensor c = concat_channels({&a, &b});
    CHECK(c.shape() == std::vector<int>{3, 3, 3});
    CHECK(c.at(0, 1, 1) == 1.0f);
    CHECK(c.at(2, 1, 1) == 2.0f);
    const Tensor bad = Tensor::full({1, 2, 3}, 0.0f);
    CHECK_THROWS_AS(concat_channels({&a, &bad}), ShapeError);
}

TEST_CASE("adam first step with unit gradients") {
    // Start at 0 so the f32 parameter can represent the -2e-4 delta
    // without rounding loss.
    Tensor p({4});
    std::vector<Tensor*> params{&p};
    const std::vector<Tensor> grads{Tensor::full({4}, 1.0f)};
    AdamState adam;
    adam.step(params, grads);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(-static_cast<double>(p[i]) - 2e-4) < 1e-8);
    }
}

TEST_CASE("adam leaves parameters unchanged under zero gradients") {
    Rng rng(11);
    Tensor p = rng.randn({8});
    const Tensor orig = p;
    std::vector<Tensor*> params{&p};
    const std::vector<Tensor> grads{Tensor({8})};
    AdamState adam;
    for (int k = 0; k < 5; ++k) adam.step(params, grads);
    for (int i = 0; i < 8; ++i) CHECK(p[i] == orig[i]);
}

TEST_CASE("adam rejects mismatched gradient shapes") {
    Tensor p = Tensor::full({4}, 1.0f);
    std::vector<Tensor*> params{&p};
    const std::vector<Tensor> grads{Tensor({5})};
    AdamState adam;
    CHECK_THROWS_AS(adam.step(params, grads), ShapeError);
}

TEST_CASE("learning-rate decay floors at 1e-4") {
    AdamState adam;
    CHECK(adam.lr == doctest::Approx(2e-4));
    // 2e-4 * 0.999991^k reaches 1e-4 after ~77k decays.
    for (int k = 0; k < 90000; ++k) adam.decay_epoch();
    CHECK(adam.lr == doctest::Approx(1e-4));
    adam.decay_epoch();
    CHECK(adam.lr == doctest::Approx(1e-4));
}

TEST_CASE("conv init is fan-in bounded and deterministic") {
    Rng a(5), b(5);
    ConvLayer la(4, 8), lb(4, 8);
    la.init(a);
    lb.init(b);
    const double bound = std::sqrt(1.0 / (4 * 9));
    for (std::int64_t i = 0; i < la.kernel.size(); ++i) {
        CHECK(la.kernel[i] == lb.kernel[i]);
        CHECK(std::abs(la.kernel[i]) <= bound);
    }
    for (std::int64_t i = 0; i < la.bias.size(); ++i) CHECK(la.bias[i] == 0.0f);
}
