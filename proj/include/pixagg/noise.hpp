#pragma once

#include "pixagg/tensor.hpp"

namespace pixagg {

// Signal-dependent Gaussian noise levels in linear intensity units:
// variance sigma_s * q + sigma_r^2 at clean intensity q.
struct NoiseParams {
    double sigma_s = 0.0;
    double sigma_r = 0.0;

    void validate() const;
};

// Training ranges the noise parameters are drawn from.
inline constexpr double kSigmaSLo = 1e-4;
inline constexpr double kSigmaSHi = 1e-2;
inline constexpr double kSigmaRLo = 1e-3;
inline constexpr double kSigmaRHi = 0.0316227766016838; // 10^-1.5

NoiseParams sample_noise_params(Rng& rng);

// sRGB gamma curve, alpha = 0.055. Input is clamped to [0,1] first.
double gamma_correct_scalar(double y);
double inverse_gamma_scalar(double z);
// Derivative of the (clamped) gamma curve; zero outside [0,1].
double gamma_deriv_scalar(double y);

Tensor gamma_correct(const Tensor& y);
Tensor inverse_gamma(const Tensor& z);

// x + eps, eps(u,v) ~ N(0, sigma_s * x(u,v) + sigma_r^2). The result is
// not clipped; clamping happens only inside gamma_correct.
Tensor add_noise(const Tensor& x_linear, const NoiseParams& p, Rng& rng);

// Per-pixel noise-level map sqrt(sigma_r^2 + sigma_s * q_ref).
Tensor estimate_noise_level(const Tensor& ref, const NoiseParams& p);

} // namespace pixagg
