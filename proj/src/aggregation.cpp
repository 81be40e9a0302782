#include "pixagg/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pixagg/parallel.hpp"

namespace pixagg {

RigidGrid build_rigid_grid(int dim, std::array<int, 3> extents) {
    if (dim != 2 && dim != 3) {
        throw GridError("rigid grid dimension must be 2 or 3");
    }
    RigidGrid g;
    g.dim = dim;
    g.extents = extents;
    for (int a = 0; a < dim; ++a) {
        const int e = extents[static_cast<std::size_t>(a)];
        if (e < 1 || e % 2 == 0) {
            throw GridError("rigid grid extents must be odd and >= 1, got " + std::to_string(e));
        }
    }
    const int ku = extents[0], kv = extents[1];
    const int kt = dim == 3 ? extents[2] : 1;
    for (int du = -(ku / 2); du <= ku / 2; ++du) {
        for (int dv = -(kv / 2); dv <= kv / 2; ++dv) {
            for (int dt = -(kt / 2); dt <= kt / 2; ++dt) {
                g.points.push_back({du, dv, dt});
            }
        }
    }
    return g;
}

GroupPartition::GroupPartition(int groups, int samples) : s(groups), n(samples) {
    if (groups < 1 || samples < 1 || samples % groups != 0) {
        throw PartitionError("group count must divide the sample count");
    }
}

namespace {

void check_fields(const Tensor& x, const RigidGrid& grid, const Tensor& offsets,
                  const Tensor* weights) {
    if (grid.dim == 2) {
        if (x.rank() != 2) throw ShapeError("spatial aggregation expects a 2D source");
    } else {
        if (x.rank() != 3) throw ShapeError("spatio-temporal aggregation expects a 3D source");
    }
    const int h = x.dim(0), w = x.dim(1);
    if (offsets.rank() != 4 || offsets.dim(0) != h || offsets.dim(1) != w ||
        offsets.dim(2) != grid.n() || offsets.dim(3) != grid.dim) {
        throw ShapeError("offset field shape must be h x w x n x d");
    }
    if (weights) {
        if (weights->rank() != 3 || weights->dim(0) != h || weights->dim(1) != w ||
            weights->dim(2) != grid.n()) {
            throw ShapeError("weight field shape must be h x w x n");
        }
        if (!weights->all_finite()) throw InputError("weight field contains nonfinite values");
    }
    if (!offsets.all_finite()) throw InputError("offset field contains nonfinite values");
}

} // namespace

Tensor sample_stack(const Tensor& x, const RigidGrid& grid, const Tensor& offsets) {
    check_fields(x, grid, offsets, nullptr);
    const int h = x.dim(0), w = x.dim(1), n = grid.n();
    const double t_ref = grid.dim == 3 ? (x.dim(2) - 1) / 2.0 : 0.0;
    Tensor stack({n, h, w});
    parallel_for_chunks(h, 16, [&](int, int row_begin, int row_end) {
    for (int u = row_begin; u < row_end; ++u) {
        for (int v = 0; v < w; ++v) {
            for (int i = 0; i < n; ++i) {
                const auto& p = grid.points[static_cast<std::size_t>(i)];
                const double su = u + p[0] + offsets.at(u, v, i, 0);
                const double sv = v + p[1] + offsets.at(u, v, i, 1);
                double val;
                if (grid.dim == 2) {
                    val = bilinear_sample(x, {su, sv});
                } else {
                    const double st = t_ref + p[2] + offsets.at(u, v, i, 2);
                    val = trilinear_sample(x, {su, sv, st});
                }
                stack.at(i, u, v) = static_cast<float>(val);
            }
        }
    }
    });
    return stack;
}

SampleStackGrads sample_stack_backward(const Tensor& x, const RigidGrid& grid,
                                       const Tensor& offsets, const Tensor& upstream) {
    check_fields(x, grid, offsets, nullptr);
    const int h = x.dim(0), w = x.dim(1), n = grid.n();
    if (upstream.rank() != 3 || upstream.dim(0) != n || upstream.dim(1) != h ||
        upstream.dim(2) != w) {
        throw ShapeError("upstream stack gradient shape mismatch");
    }
    const double t_ref = grid.dim == 3 ? (x.dim(2) - 1) / 2.0 : 0.0;
    SampleStackGrads g{Tensor(x.shape()), Tensor(offsets.shape())};
    // grad_offsets rows are disjoint across chunks; grad_x scatters overlap,
    // so each chunk gets its own buffer, merged in chunk order.
    constexpr int kChunks = 16;
    std::vector<Tensor> grad_x_parts(kChunks, Tensor(x.shape()));
    parallel_for_chunks(h, kChunks, [&](int chunk, int row_begin, int row_end) {
    Tensor& grad_x = grad_x_parts[static_cast<std::size_t>(chunk)];
    for (int u = row_begin; u < row_end; ++u) {
        for (int v = 0; v < w; ++v) {
            for (int i = 0; i < n; ++i) {
                const double up = upstream.at(i, u, v);
                if (up == 0.0) continue;
                const auto& p = grid.points[static_cast<std::size_t>(i)];
                const double su = u + p[0] + offsets.at(u, v, i, 0);
                const double sv = v + p[1] + offsets.at(u, v, i, 1);
                if (grid.dim == 2) {
                    const SampleGrad2 sg = bilinear_backward(x, {su, sv}, up);
                    for (const auto& [idx, gv] : sg.grad_x) grad_x[idx] += gv;
                    g.grad_offsets.at(u, v, i, 0) += static_cast<float>(sg.du);
                    g.grad_offsets.at(u, v, i, 1) += static_cast<float>(sg.dv);
                } else {
                    const double st = t_ref + p[2] + offsets.at(u, v, i, 2);
                    const SampleGrad3 sg = trilinear_backward(x, {su, sv, st}, up);
                    for (const auto& [idx, gv] : sg.grad_x) grad_x[idx] += gv;
                    g.grad_offsets.at(u, v, i, 0) += static_cast<float>(sg.du);
                    g.grad_offsets.at(u, v, i, 1) += static_cast<float>(sg.dv);
                    g.grad_offsets.at(u, v, i, 2) += static_cast<float>(sg.dt);
                }
            }
        }
    }
    });
    for (const Tensor& part : grad_x_parts) g.grad_x += part;
    return g;
}

Tensor aggregate_stack(const Tensor& stack, const Tensor& weights) {
    const int n = stack.dim(0), h = stack.dim(1), w = stack.dim(2);
    if (weights.rank() != 3 || weights.dim(0) != h || weights.dim(1) != w || weights.dim(2) != n) {
        throw ShapeError("weight field shape must be h x w x n");
    }
    Tensor y({h, w});
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += static_cast<double>(stack.at(i, u, v)) * weights.at(u, v, i);
            y.at(u, v) = static_cast<float>(acc);
        }
    }
    return y;
}

Tensor aggregate_stack_group(const Tensor& stack, const Tensor& weights,
                             const GroupPartition& part, int group) {
    const int n = stack.dim(0), h = stack.dim(1), w = stack.dim(2);
    if (part.n != n) throw PartitionError("partition sample count mismatch");
    if (group < 0 || group >= part.s) throw PartitionError("group id out of range");
    const int lo = group * part.group_size();
    const int hi = lo + part.group_size();
    Tensor y({h, w});
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            double acc = 0.0;
            for (int i = lo; i < hi; ++i) acc += static_cast<double>(stack.at(i, u, v)) * weights.at(u, v, i);
            y.at(u, v) = static_cast<float>(acc * part.s);
        }
    }
    return y;
}

Tensor aggregate_spatial(const Tensor& x, const RigidGrid& grid, const Tensor& offsets,
                         const Tensor& weights) {
    if (grid.dim != 2) throw GridError("aggregate_spatial needs a 2D grid");
    check_fields(x, grid, offsets, &weights);
    return aggregate_stack(sample_stack(x, grid, offsets), weights);
}

Tensor aggregate_spatiotemporal(const Tensor& x, const RigidGrid& grid, const Tensor& offsets,
                                const Tensor& weights) {
    if (grid.dim != 3) throw GridError("aggregate_spatiotemporal needs a 3D grid");
    check_fields(x, grid, offsets, &weights);
    return aggregate_stack(sample_stack(x, grid, offsets), weights);
}

Tensor aggregate_group(const Tensor& x, const RigidGrid& grid, const Tensor& offsets,
                       const Tensor& weights, const GroupPartition& part, int group) {
    check_fields(x, grid, offsets, &weights);
    return aggregate_stack_group(sample_stack(x, grid, offsets), weights, part, group);
}

AggregationGrads aggregation_backward(const Tensor& x, const RigidGrid& grid,
                                      const Tensor& offsets, const Tensor& weights,
                                      const Tensor& upstream) {
    check_fields(x, grid, offsets, &weights);
    const int h = x.dim(0), w = x.dim(1), n = grid.n();
    if (upstream.rank() != 2 || upstream.dim(0) != h || upstream.dim(1) != w) {
        throw ShapeError("upstream gradient must be h x w");
    }
    const Tensor stack = sample_stack(x, grid, offsets);
    AggregationGrads g{Tensor(x.shape()), Tensor(offsets.shape()), Tensor(weights.shape())};

    // dY/dF is the sampled value; dY/dS is the weight.
    Tensor stack_up({n, h, w});
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            const float up = upstream.at(u, v);
            for (int i = 0; i < n; ++i) {
                g.grad_weights.at(u, v, i) = up * stack.at(i, u, v);
                stack_up.at(i, u, v) = up * weights.at(u, v, i);
            }
        }
    }
    SampleStackGrads sg = sample_stack_backward(x, grid, offsets, stack_up);
    g.grad_x = std::move(sg.grad_x);
    g.grad_offsets = std::move(sg.grad_offsets);
    return g;
}

double receptive_field_stat(const Tensor& offsets, const RigidGrid& grid) {
    if (offsets.rank() != 4 || offsets.dim(2) != grid.n() || offsets.dim(3) != grid.dim) {
        throw ShapeError("offset field shape must be h x w x n x d");
    }
    const int h = offsets.dim(0), w = offsets.dim(1), n = grid.n();
    double total = 0.0;
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            double min_u = 1e30, max_u = -1e30, min_v = 1e30, max_v = -1e30;
            for (int i = 0; i < n; ++i) {
                const auto& p = grid.points[static_cast<std::size_t>(i)];
                const double pu = p[0] + offsets.at(u, v, i, 0);
                const double pv = p[1] + offsets.at(u, v, i, 1);
                min_u = std::min(min_u, pu);
                max_u = std::max(max_u, pu);
                min_v = std::min(min_v, pv);
                max_v = std::max(max_v, pv);
            }
            total += std::max(max_u - min_u, max_v - min_v);
        }
    }
    return total / (static_cast<double>(h) * w);
}

} // namespace pixagg
