#include "pixagg/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace pixagg {

double psnr(const Tensor& y, const Tensor& y_gt) {
    if (!y.same_shape(y_gt)) {
        throw ShapeError("psnr operands must have the same shape");
    }
    double mse = 0.0;
    for (std::int64_t i = 0; i < y.size(); ++i) {
        const double d = static_cast<double>(y[i]) - y_gt[i];
        mse += d * d;
    }
    mse /= static_cast<double>(y.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWin = 11;

std::array<double, kWin> gaussian_window() {
    std::array<double, kWin> w{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = i - kWin / 2;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= sum;
    return w;
}

} // namespace

double ssim(const Tensor& y, const Tensor& y_gt) {
    if (!y.same_shape(y_gt)) {
        throw ShapeError("ssim operands must have the same shape");
    }
    if (y.rank() != 2 || y.dim(0) < kWin || y.dim(1) < kWin) {
        throw ShapeError("ssim needs 2D images of at least 11x11");
    }
    const int h = y.dim(0), w = y.dim(1);
    static const std::array<double, kWin> g = gaussian_window();
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;

    double total = 0.0;
    std::int64_t count = 0;
    for (int u = 0; u + kWin <= h; ++u) {
        for (int v = 0; v + kWin <= w; ++v) {
            double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
            for (int a = 0; a < kWin; ++a) {
                for (int b = 0; b < kWin; ++b) {
                    const double wgt = g[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(b)];
                    const double px = y.at(u + a, v + b);
                    const double py = y_gt.at(u + a, v + b);
                    mx += wgt * px;
                    my += wgt * py;
                    mxx += wgt * px * px;
                    myy += wgt * py * py;
                    mxy += wgt * px * py;
                }
            }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cov = mxy - mx * my;
            const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

} // namespace pixagg
