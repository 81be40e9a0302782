#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "pixagg/aggregation.hpp"
#include "pixagg/nn.hpp"
#include "pixagg/tensor.hpp"

namespace pixagg {

// Architecture and operating-mode switches. The channel plan is the
// reference plan scaled by width_mult; n*d output channels are exact.
struct ModelConfig {
    int dim = 3;                             // 2: single image, 3: video
    int tau = 2;                             // temporal radius (video)
    std::array<int, 3> grid_extents{3, 3, 3}; // {5,5,1} for single image
    double width_mult = 0.125;
    bool blind = true;                       // no noise-level input channel
    double offset_scale = 8.0;               // spatial Tanh multiplier
    bool rigid = false;                      // ablation: zero offsets
    bool fixed_weights = false;              // ablation: uniform 1/n weights
    bool direct = false;                     // ablation: direct synthesis head
    bool concat_sampled = true;              // off for the no-concat ablation

    int frames() const { return dim == 3 ? 2 * tau + 1 : 1; }
    int n() const {
        return grid_extents[0] * grid_extents[1] * (dim == 3 ? grid_extents[2] : 1);
    }
    int in_channels() const { return frames() + (blind ? 0 : 1); }
    int ch(int base) const;
    // Spatial resolutions must divide 2^depth (three pooling stages).
    static constexpr int kDepthFactor = 8;
};

struct Model {
    ModelConfig cfg;
    RigidGrid grid;
    std::vector<ConvLayer> offset_layers; // C1..C27
    std::vector<ConvLayer> weight_layers; // empty for direct / fixed-weights

    void build();
    void init_params(std::uint64_t seed);
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
};

struct LayerCache {
    Tensor input;
    Tensor preact;
};

struct ForwardCache {
    std::vector<LayerCache> off;
    Tensor e1, e2, e3; // encoder block outputs feeding the skip sums
    Tensor toff;       // Tanh output of C27
    Tensor volume;     // source for sampling, h x w (x f)
    Tensor stack;      // sampled pixels, n x h x w
    Tensor wb_input;
    std::vector<LayerCache> wb;
};

struct ForwardResult {
    Tensor y;                    // denoised reference frame, h x w, linear
    std::vector<Tensor> y_groups;
    Tensor offsets;              // h x w x n x d (zeros in rigid mode)
    Tensor weights;              // h x w x n
    Tensor features;             // last offset-net features
    ForwardCache cache;
};

// frames: [f, h, w] linear noisy input (f == 1 for single-image models).
// noise_map: [h, w] for non-blind models, null otherwise. groups > 0
// additionally produces the s group-restricted outputs.
ForwardResult model_forward(const Model& m, const Tensor& frames, const Tensor* noise_map,
                            int groups);

// Gradients for every parameter (same order as Model::parameters()) given
// upstream gradients on y and on each group output.
std::vector<Tensor> model_backward(const Model& m, const ForwardResult& fwd,
                                   const Tensor& grad_y,
                                   const std::vector<Tensor>& grad_groups);

// Checkpoint file, magic "PXC1": config echo, iteration, parameters.
void save_checkpoint(const std::filesystem::path& path, const Model& m, std::int64_t iteration);
struct Checkpoint {
    Model model;
    std::int64_t iteration = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace pixagg
