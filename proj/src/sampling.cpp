#include "pixagg/sampling.hpp"

#include <cmath>

namespace pixagg {

double hat_weight(double d) {
    const double w = 1.0 - std::abs(d);
    return w > 0.0 ? w : 0.0;
}

double hat_deriv(double d) {
    // d/dd max(0, 1-|d|); 0 at the kink |d|==1 and at the apex d==0.
    if (d == 0.0 || std::abs(d) >= 1.0) return 0.0;
    return d > 0.0 ? -1.0 : 1.0;
}

namespace {

void check2d(const Tensor& x) {
    if (x.rank() != 2) {
        throw ShapeError("bilinear sampling expects a 2D tensor");
    }
}

void check3d(const Tensor& x) {
    if (x.rank() != 3) {
        throw ShapeError("trilinear sampling expects a 3D tensor");
    }
}

// Integer lattice positions within distance 1 of c, clipped to [0, n).
struct Axis {
    int idx[2];
    int count = 0;
};

Axis axis_neighbors(double c, int n) {
    Axis a;
    const int lo = static_cast<int>(std::floor(c));
    for (int p = lo; p <= lo + 1; ++p) {
        if (p >= 0 && p < n && hat_weight(c - p) > 0.0) {
            a.idx[a.count++] = p;
        }
    }
    return a;
}

} // namespace

double bilinear_sample(const Tensor& x, SamplePoint2 p) {
    check2d(x);
    const Axis au = axis_neighbors(p.u, x.dim(0));
    const Axis av = axis_neighbors(p.v, x.dim(1));
    double acc = 0.0;
    for (int a = 0; a < au.count; ++a) {
        const double wu = hat_weight(p.u - au.idx[a]);
        for (int b = 0; b < av.count; ++b) {
            acc += x.at(au.idx[a], av.idx[b]) * wu * hat_weight(p.v - av.idx[b]);
        }
    }
    return acc;
}

double trilinear_sample(const Tensor& x, SamplePoint3 p) {
    check3d(x);
    const Axis au = axis_neighbors(p.u, x.dim(0));
    const Axis av = axis_neighbors(p.v, x.dim(1));
    const Axis at = axis_neighbors(p.t, x.dim(2));
    double acc = 0.0;
    for (int a = 0; a < au.count; ++a) {
        const double wu = hat_weight(p.u - au.idx[a]);
        for (int b = 0; b < av.count; ++b) {
            const double wuv = wu * hat_weight(p.v - av.idx[b]);
            for (int c = 0; c < at.count; ++c) {
                acc += x.at(au.idx[a], av.idx[b], at.idx[c]) * wuv * hat_weight(p.t - at.idx[c]);
            }
        }
    }
    return acc;
}

SampleGrad2 bilinear_backward(const Tensor& x, SamplePoint2 p, double upstream) {
    check2d(x);
    SampleGrad2 g;
    const Axis au = axis_neighbors(p.u, x.dim(0));
    const Axis av = axis_neighbors(p.v, x.dim(1));
    for (int a = 0; a < au.count; ++a) {
        const double wu = hat_weight(p.u - au.idx[a]);
        const double dwu = hat_deriv(p.u - au.idx[a]);
        for (int b = 0; b < av.count; ++b) {
            const double wv = hat_weight(p.v - av.idx[b]);
            const double dwv = hat_deriv(p.v - av.idx[b]);
            const double val = x.at(au.idx[a], av.idx[b]);
            g.grad_x.emplace_back(static_cast<std::int64_t>(au.idx[a]) * x.dim(1) + av.idx[b],
                                  static_cast<float>(upstream * wu * wv));
            g.du += upstream * val * dwu * wv;
            g.dv += upstream * val * wu * dwv;
        }
    }
    return g;
}

SampleGrad3 trilinear_backward(const Tensor& x, SamplePoint3 p, double upstream) {
    check3d(x);
    SampleGrad3 g;
    const Axis au = axis_neighbors(p.u, x.dim(0));
    const Axis av = axis_neighbors(p.v, x.dim(1));
    const Axis at = axis_neighbors(p.t, x.dim(2));
    const std::int64_t sw = x.dim(2);
    const std::int64_t su = static_cast<std::int64_t>(x.dim(1)) * sw;
    for (int a = 0; a < au.count; ++a) {
        const double wu = hat_weight(p.u - au.idx[a]);
        const double dwu = hat_deriv(p.u - au.idx[a]);
        for (int b = 0; b < av.count; ++b) {
            const double wv = hat_weight(p.v - av.idx[b]);
            const double dwv = hat_deriv(p.v - av.idx[b]);
            for (int c = 0; c < at.count; ++c) {
                const double wt = hat_weight(p.t - at.idx[c]);
                const double dwt = hat_deriv(p.t - at.idx[c]);
                const double val = x.at(au.idx[a], av.idx[b], at.idx[c]);
                g.grad_x.emplace_back(au.idx[a] * su + av.idx[b] * sw + at.idx[c],
                                      static_cast<float>(upstream * wu * wv * wt));
                g.du += upstream * val * dwu * wv * wt;
                g.dv += upstream * val * wu * dwv * wt;
                g.dt += upstream * val * wu * wv * dwt;
            }
        }
    }
    return g;
}

} // namespace pixagg
