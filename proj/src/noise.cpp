#include "pixagg/noise.hpp"

#include <algorithm>
#include <cmath>

namespace pixagg {

namespace {
constexpr double kAlpha = 0.055;
constexpr double kLinearCut = 0.0031308;
constexpr double kEncodedCut = 12.92 * kLinearCut;
} // namespace

void NoiseParams::validate() const {
    if (!(sigma_s >= 0.0) || !(sigma_r >= 0.0) || !std::isfinite(sigma_s) ||
        !std::isfinite(sigma_r)) {
        throw ParamError("noise parameters must be finite and nonnegative");
    }
}

NoiseParams sample_noise_params(Rng& rng) {
    // Log-uniform over the training ranges.
    NoiseParams p;
    p.sigma_s = std::pow(10.0, rng.uniform(std::log10(kSigmaSLo), std::log10(kSigmaSHi)));
    p.sigma_r = std::pow(10.0, rng.uniform(std::log10(kSigmaRLo), std::log10(kSigmaRHi)));
    return p;
}

double gamma_correct_scalar(double y) {
    y = std::clamp(y, 0.0, 1.0);
    if (y <= kLinearCut) return 12.92 * y;
    return (1.0 + kAlpha) * std::pow(y, 1.0 / 2.4) - kAlpha;
}

double inverse_gamma_scalar(double z) {
    if (z <= kEncodedCut) return z / 12.92;
    return std::pow((z + kAlpha) / (1.0 + kAlpha), 2.4);
}

double gamma_deriv_scalar(double y) {
    if (y < 0.0 || y > 1.0) return 0.0;
    if (y <= kLinearCut) return 12.92;
    return (1.0 + kAlpha) / 2.4 * std::pow(y, 1.0 / 2.4 - 1.0);
}

Tensor gamma_correct(const Tensor& y) {
    Tensor out(y.shape());
    for (std::int64_t i = 0; i < y.size(); ++i) {
        out[i] = static_cast<float>(gamma_correct_scalar(y[i]));
    }
    return out;
}

Tensor inverse_gamma(const Tensor& z) {
    Tensor out(z.shape());
    for (std::int64_t i = 0; i < z.size(); ++i) {
        out[i] = static_cast<float>(inverse_gamma_scalar(z[i]));
    }
    return out;
}

Tensor add_noise(const Tensor& x_linear, const NoiseParams& p, Rng& rng) {
    p.validate();
    Tensor out(x_linear.shape());
    for (std::int64_t i = 0; i < x_linear.size(); ++i) {
        const double q = x_linear[i];
        const double var = p.sigma_s * q + p.sigma_r * p.sigma_r;
        const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
        out[i] = static_cast<float>(q + sd * rng.normal());
    }
    return out;
}

Tensor estimate_noise_level(const Tensor& ref, const NoiseParams& p) {
    p.validate();
    Tensor out(ref.shape());
    for (std::int64_t i = 0; i < ref.size(); ++i) {
        const double var = p.sigma_r * p.sigma_r + p.sigma_s * ref[i];
        out[i] = static_cast<float>(std::sqrt(std::max(var, 0.0)));
    }
    return out;
}

} // namespace pixagg
