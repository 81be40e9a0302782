#include "pixagg/tensor.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pixagg {

namespace {

std::int64_t checked_size(const std::vector<int>& shape) {
    if (shape.empty()) {
        throw ShapeError("tensor shape must have at least one dimension");
    }
    std::int64_t n = 1;
    for (int d : shape) {
        if (d < 1) {
            throw ShapeError("tensor dimension must be >= 1, got " + std::to_string(d));
        }
        n *= d;
    }
    return n;
}

} // namespace

Tensor::Tensor(std::vector<int> shape, float fill) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(checked_size(shape_)), fill);
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    return Tensor(std::move(shape), value);
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<float> values) {
    if (checked_size(shape) != static_cast<std::int64_t>(values.size())) {
        throw ShapeError("value count does not match shape");
    }
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(values);
    return t;
}

std::int64_t Tensor::offset(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != rank()) {
        throw ShapeError("index rank mismatch");
    }
    std::int64_t off = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
        if (idx[a] < 0 || idx[a] >= shape_[a]) {
            throw ShapeError("index out of range");
        }
        off = off * shape_[a] + idx[a];
    }
    return off;
}

std::vector<int> Tensor::unflatten(std::int64_t flat) const {
    if (flat < 0 || flat >= size()) {
        throw ShapeError("flat index out of range");
    }
    std::vector<int> idx(shape_.size());
    for (int a = rank() - 1; a >= 0; --a) {
        idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % shape_[static_cast<std::size_t>(a)]);
        flat /= shape_[static_cast<std::size_t>(a)];
    }
    return idx;
}

bool Tensor::all_finite() const {
    for (float v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (!same_shape(other)) {
        throw ShapeError("elementwise add shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(float s) {
    for (float& v : data_) v *= s;
    return *this;
}

double reduce_sum(const Tensor& x) {
    if (x.empty()) {
        throw ShapeError("reduction over empty tensor");
    }
    double acc = 0.0;
    for (std::int64_t i = 0; i < x.size(); ++i) acc += x[i];
    return acc;
}

double reduce_mean(const Tensor& x) {
    return reduce_sum(x) / static_cast<double>(x.size());
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 kept away from 0.
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::int64_t Rng::uniform_int(std::int64_t n) {
    if (n <= 0) {
        throw InputError("uniform_int bound must be positive");
    }
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t r = 0;
    do {
        r = next_u64();
    } while (r >= limit);
    return static_cast<std::int64_t>(r % un);
}

Rng Rng::split(std::uint64_t stream_id) const {
    std::uint64_t sm = seed_ ^ (0x517cc1b727220a95ULL * (stream_id + 1));
    return Rng(splitmix64(sm));
}

Tensor Rng::randn(std::vector<int> shape) {
    Tensor t(std::move(shape));
    for (std::int64_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<float>(normal());
    }
    return t;
}

Tensor Rng::rand_uniform(std::vector<int> shape, float lo, float hi) {
    Tensor t(std::move(shape));
    for (std::int64_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<float>(uniform(lo, hi));
    }
    return t;
}

} // namespace pixagg
