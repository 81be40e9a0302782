#pragma once

#include <vector>

#include "pixagg/tensor.hpp"

namespace pixagg {

// Annealing coefficient eta * gamma^m for the group regularizer.
struct AnnealSchedule {
    double eta = 100.0;
    double gamma = 0.9998;
};

double anneal_coeff(const AnnealSchedule& s, std::int64_t m);

// Mean absolute difference of gamma-corrected tensors.
double l1_gamma_loss(const Tensor& y, const Tensor& y_gt);

// Loss plus its gradient with respect to y (linear space, through the
// clamped gamma curve; subgradient 0 at zero residual).
struct LossGrad {
    double value = 0.0;
    Tensor grad;
};
LossGrad l1_gamma_loss_grad(const Tensor& y, const Tensor& y_gt);

// l(Y) + eta*gamma^m * sum_i l(Y_i); the video training objective.
double video_loss(const Tensor& y, const std::vector<Tensor>& y_groups, const Tensor& y_gt,
                  const AnnealSchedule& s, std::int64_t m, int expected_groups);

struct VideoLossGrad {
    double value = 0.0;
    Tensor grad_y;
    std::vector<Tensor> grad_groups;
};
VideoLossGrad video_loss_grad(const Tensor& y, const std::vector<Tensor>& y_groups,
                              const Tensor& y_gt, const AnnealSchedule& s, std::int64_t m,
                              int expected_groups);

} // namespace pixagg
