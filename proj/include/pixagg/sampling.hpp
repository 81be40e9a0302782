#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pixagg/tensor.hpp"

namespace pixagg {

struct SamplePoint2 {
    double u = 0.0; // row coordinate, pixels
    double v = 0.0; // column coordinate, pixels
};

struct SamplePoint3 {
    double u = 0.0;
    double v = 0.0;
    double t = 0.0; // frame coordinate
};

// Hat kernel max(0, 1-|d|) and its subderivative (0 at the apex and at
// |d| == 1).
double hat_weight(double d);
double hat_deriv(double d);

// Interpolated value of a 2D image at a fractional point. Points outside
// the image contribute zero; there is no clamping.
double bilinear_sample(const Tensor& x, SamplePoint2 p);

// Interpolated value of an h x w x f volume at a fractional point, frames
// on the last axis.
double trilinear_sample(const Tensor& x, SamplePoint3 p);

struct SampleGrad2 {
    // (flat index into x, weight * upstream) for the <=4 contributing pixels.
    std::vector<std::pair<std::int64_t, float>> grad_x;
    double du = 0.0;
    double dv = 0.0;
};

struct SampleGrad3 {
    std::vector<std::pair<std::int64_t, float>> grad_x;
    double du = 0.0;
    double dv = 0.0;
    double dt = 0.0;
};

SampleGrad2 bilinear_backward(const Tensor& x, SamplePoint2 p, double upstream);
SampleGrad3 trilinear_backward(const Tensor& x, SamplePoint3 p, double upstream);

} // namespace pixagg
