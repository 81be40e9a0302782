#pragma once

#include "pixagg/tensor.hpp"

namespace pixagg {

// 10*log10(1/MSE) for images in [0,1]; +inf when the images are identical.
double psnr(const Tensor& y, const Tensor& y_gt);

// Single-scale SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
// L=1, averaged over valid window positions.
double ssim(const Tensor& y, const Tensor& y_gt);

} // namespace pixagg
