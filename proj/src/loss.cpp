#include "pixagg/loss.hpp"

#include <cmath>

#include "pixagg/noise.hpp"

namespace pixagg {

double anneal_coeff(const AnnealSchedule& s, std::int64_t m) {
    return s.eta * std::pow(s.gamma, static_cast<double>(m));
}

double l1_gamma_loss(const Tensor& y, const Tensor& y_gt) {
    if (!y.same_shape(y_gt)) {
        throw ShapeError("loss operands must have the same shape");
    }
    double acc = 0.0;
    for (std::int64_t i = 0; i < y.size(); ++i) {
        acc += std::abs(gamma_correct_scalar(y[i]) - gamma_correct_scalar(y_gt[i]));
    }
    return acc / static_cast<double>(y.size());
}

LossGrad l1_gamma_loss_grad(const Tensor& y, const Tensor& y_gt) {
    if (!y.same_shape(y_gt)) {
        throw ShapeError("loss operands must have the same shape");
    }
    LossGrad out;
    out.grad = Tensor(y.shape());
    const double inv_count = 1.0 / static_cast<double>(y.size());
    double acc = 0.0;
    for (std::int64_t i = 0; i < y.size(); ++i) {
        const double r = gamma_correct_scalar(y[i]) - gamma_correct_scalar(y_gt[i]);
        acc += std::abs(r);
        const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        out.grad[i] = static_cast<float>(sign * gamma_deriv_scalar(y[i]) * inv_count);
    }
    out.value = acc * inv_count;
    return out;
}

double video_loss(const Tensor& y, const std::vector<Tensor>& y_groups, const Tensor& y_gt,
                  const AnnealSchedule& s, std::int64_t m, int expected_groups) {
    if (static_cast<int>(y_groups.size()) != expected_groups) {
        throw PartitionError("group output count mismatch");
    }
    double total = l1_gamma_loss(y, y_gt);
    const double coeff = anneal_coeff(s, m);
    for (const Tensor& g : y_groups) total += coeff * l1_gamma_loss(g, y_gt);
    return total;
}

VideoLossGrad video_loss_grad(const Tensor& y, const std::vector<Tensor>& y_groups,
                              const Tensor& y_gt, const AnnealSchedule& s, std::int64_t m,
                              int expected_groups) {
    if (static_cast<int>(y_groups.size()) != expected_groups) {
        throw PartitionError("group output count mismatch");
    }
    VideoLossGrad out;
    LossGrad main = l1_gamma_loss_grad(y, y_gt);
    out.value = main.value;
    out.grad_y = std::move(main.grad);
    const double coeff = anneal_coeff(s, m);
    out.grad_groups.reserve(y_groups.size());
    for (const Tensor& g : y_groups) {
        LossGrad lg = l1_gamma_loss_grad(g, y_gt);
        out.value += coeff * lg.value;
        lg.grad *= static_cast<float>(coeff);
        out.grad_groups.push_back(std::move(lg.grad));
    }
    return out;
}

} // namespace pixagg
