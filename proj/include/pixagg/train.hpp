#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pixagg/data.hpp"
#include "pixagg/loss.hpp"
#include "pixagg/model.hpp"

namespace pixagg {

// Dataset generation settings for the synthetic pipeline.
struct SynthConfig {
    std::filesystem::path out;
    int count = 8;
    int tau = 2;
    int size = 32;
    std::uint64_t seed = 0;
    double sigma_s = -1.0; // < 0: sample per sequence from the training range
    double sigma_r = -1.0;
    double shift = -1.0; // < 0: per-sequence random integer shift in [0,6]
};

void synthesize_dataset(const SynthConfig& cfg);

struct TrainConfig {
    std::string mode = "stpan"; // pan | stpan | rigid | fixed-weights | direct | no-reg | no-concat
    std::filesystem::path data_root;
    std::filesystem::path out_dir;
    int iters = 500;
    int batch = 2;
    int patch = 32;
    std::uint64_t seed = 1;
    double sigma_s = -1.0; // < 0: resample noise per iteration
    double sigma_r = -1.0;
    double eta = 100.0;
    double gamma = 0.9998;
    int groups = 3;
    double lr = 2e-4;
    double width_mult = 0.125;
    double offset_scale = 8.0;
    bool blind = true;
};

ModelConfig model_config_for_mode(const TrainConfig& cfg);

struct TrainResult {
    Model model;
    std::vector<double> loss_trace;
    std::filesystem::path checkpoint;
};

// Runs the loop, writes checkpoint.pxc and loss_log.csv under out_dir.
TrainResult train(const TrainConfig& cfg);

// Runs the model on one noisy sequence (linear space); returns the
// denoised reference frame in linear space.
Tensor denoise_sequence(const Model& m, const Tensor& noisy_frames,
                        const std::optional<NoiseParams>& params);

struct EvalRow {
    std::string name;
    double psnr = 0.0;
    double ssim = 0.0;
};

// Per-sequence metrics in gamma-corrected space for the model plus the
// noisy-reference and direct-temporal-average baselines.
std::vector<EvalRow> evaluate_dataset(const Model& m, const Dataset& ds,
                                      const std::string& model_name);

EvalRow mean_of(const std::vector<EvalRow>& rows, const std::string& suffix);

} // namespace pixagg
