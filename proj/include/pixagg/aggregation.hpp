#pragma once

#include <array>
#include <vector>

#include "pixagg/sampling.hpp"
#include "pixagg/tensor.hpp"

namespace pixagg {

// Centered integer lattice of sampling offsets (3x3, 5x5, 3x3x3, ...).
struct RigidGrid {
    int dim = 2; // 2 spatial, 3 spatio-temporal
    std::array<int, 3> extents{1, 1, 1};
    std::vector<std::array<int, 3>> points; // (u, v[, t]) offsets, row-major

    int n() const { return static_cast<int>(points.size()); }
};

RigidGrid build_rigid_grid(int dim, std::array<int, 3> extents);

// Contiguous row-major split of the n grid points into s equal groups.
struct GroupPartition {
    int s = 1;
    int n = 1;

    GroupPartition(int groups, int samples);
    int group_of(int i) const { return i / (n / s); }
    int group_size() const { return n / s; }
};

// Per-output-pixel sampled values: S[n][h][w], S(i,u,v) = interpolated
// source value at the i-th deformed grid point of output pixel (u,v).
// 2D: x is h x w, offsets h x w x n x 2. 3D: x is h x w x f (frames
// last), offsets h x w x n x 3, sampling around reference frame
// t_ref = (f-1)/2.
Tensor sample_stack(const Tensor& x, const RigidGrid& grid, const Tensor& offsets);

// Backward of sample_stack wrt the source and the offsets given an
// upstream gradient shaped like the stack.
struct SampleStackGrads {
    Tensor grad_x;
    Tensor grad_offsets;
};
SampleStackGrads sample_stack_backward(const Tensor& x, const RigidGrid& grid,
                                       const Tensor& offsets, const Tensor& upstream);

// Weighted aggregation Y(u,v) = sum_i S(i,u,v) * F(u,v,i).
Tensor aggregate_stack(const Tensor& stack, const Tensor& weights);

// Group-restricted aggregation scaled by s: Y_g = s * sum_{i in group g}.
Tensor aggregate_stack_group(const Tensor& stack, const Tensor& weights,
                             const GroupPartition& part, int group);

// One-call forms of the aggregation operators.
Tensor aggregate_spatial(const Tensor& x, const RigidGrid& grid, const Tensor& offsets,
                         const Tensor& weights);
Tensor aggregate_spatiotemporal(const Tensor& x, const RigidGrid& grid, const Tensor& offsets,
                                const Tensor& weights);
Tensor aggregate_group(const Tensor& x, const RigidGrid& grid, const Tensor& offsets,
                       const Tensor& weights, const GroupPartition& part, int group);

struct AggregationGrads {
    Tensor grad_x;
    Tensor grad_offsets;
    Tensor grad_weights;
};

// Exact gradients of the forward contraction for an upstream gradient on Y.
AggregationGrads aggregation_backward(const Tensor& x, const RigidGrid& grid,
                                      const Tensor& offsets, const Tensor& weights,
                                      const Tensor& upstream);

// Mean over pixels of the spatial L-inf diameter of the deformed grid.
double receptive_field_stat(const Tensor& offsets, const RigidGrid& grid);

} // namespace pixagg
