#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "pixagg/errors.hpp"

namespace pixagg {

// Dense row-major tensor of 32-bit floats. Shapes are validated on
// construction; indexing helpers cover the ranks the operators need.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape, float fill = 0.0f);

    static Tensor full(std::vector<int> shape, float value);
    static Tensor zeros(std::vector<int> shape) { return full(std::move(shape), 0.0f); }
    static Tensor from_values(std::vector<int> shape, std::vector<float> values);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    float& at(int i, int j) { return data_[static_cast<std::size_t>(offset2(i, j))]; }
    float at(int i, int j) const { return data_[static_cast<std::size_t>(offset2(i, j))]; }
    float& at(int i, int j, int k) { return data_[static_cast<std::size_t>(offset3(i, j, k))]; }
    float at(int i, int j, int k) const { return data_[static_cast<std::size_t>(offset3(i, j, k))]; }
    float& at(int i, int j, int k, int l) { return data_[static_cast<std::size_t>(offset4(i, j, k, l))]; }
    float at(int i, int j, int k, int l) const { return data_[static_cast<std::size_t>(offset4(i, j, k, l))]; }

    std::int64_t offset(const std::vector<int>& idx) const;
    std::vector<int> unflatten(std::int64_t flat) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    // Elementwise helpers; shapes must match.
    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(float s);
    friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
    friend Tensor operator*(Tensor a, float s) { return a *= s; }

  private:
    std::int64_t offset2(int i, int j) const { return static_cast<std::int64_t>(i) * shape_[1] + j; }
    std::int64_t offset3(int i, int j, int k) const {
        return (static_cast<std::int64_t>(i) * shape_[1] + j) * shape_[2] + k;
    }
    std::int64_t offset4(int i, int j, int k, int l) const {
        return ((static_cast<std::int64_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l;
    }

    std::vector<int> shape_;
    std::vector<float> data_;
};

// Mean over all entries with a 64-bit accumulator.
double reduce_mean(const Tensor& x);
double reduce_sum(const Tensor& x);

// Seeded 64-bit PRNG: splitmix64 seeding into xoshiro256**, Box-Muller
// normals. The algorithm is pinned so golden values are portable.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller (pairs cached).
    double normal();
    // Uniform integer in [0, n).
    std::int64_t uniform_int(std::int64_t n);

    // Derive an independent stream; deterministic in (seed, stream_id).
    Rng split(std::uint64_t stream_id) const;

    Tensor randn(std::vector<int> shape);
    Tensor rand_uniform(std::vector<int> shape, float lo, float hi);

  private:
    std::uint64_t s_[4];
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace pixagg
