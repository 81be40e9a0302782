#pragma once

#include <filesystem>
#include <vector>

#include "pixagg/noise.hpp"
#include "pixagg/tensor.hpp"

namespace pixagg {

// One training/eval sample: clean and noisy frame stacks in linear space,
// frames on the leading axis, reference frame at index tau.
struct SequenceSample {
    Tensor clean;  // [(2*tau+1), h, w], linear, in [0,1]
    Tensor noisy;  // same shape, linear, unclipped
    int tau = 2;
    NoiseParams params;

    int frames() const { return clean.dim(0); }
    Tensor clean_reference() const;
    Tensor noisy_reference() const;
};

Tensor load_image(const std::filesystem::path& path);

// inverse gamma on the clean sRGB frames, then signal-dependent noise.
SequenceSample synthesize_pair(const Tensor& clean_srgb_frames, int tau, const NoiseParams& p,
                               Rng& rng);

// Same random spatial crop applied to every frame of both stacks.
SequenceSample extract_patches(const SequenceSample& seq, int size, Rng& rng);

// Procedural clean-sequence generator: a band-limited seeded texture with
// occasional geometric structure, translated by a constant per-frame
// motion vector. Motion is sampled with L-inf magnitude == shift_px
// (integer axis-aligned/diagonal directions when shift_px is integral).
struct SequenceSpec {
    int frames = 5;
    int height = 32;
    int width = 32;
    double shift_px = 0.0; // inter-frame motion magnitude
};
Tensor generate_clean_sequence(const SequenceSpec& spec, Rng& rng); // sRGB [f,h,w]

// On-disk dataset layout: <root>/clean/seq_XXXX/frame_XX.pgm (sRGB,
// 16-bit), <root>/noisy/seq_XXXX/frame_XX.pxt (linear), manifest.txt.
struct DatasetEntry {
    std::string name;
    NoiseParams params;
    double shift_px = 0.0;
};
struct Dataset {
    std::filesystem::path root;
    int tau = 2;
    std::vector<DatasetEntry> entries;
};

Dataset read_manifest(const std::filesystem::path& root);
void write_manifest(const Dataset& ds);
Tensor load_sequence_frames(const std::filesystem::path& dir, const char* ext); // [f,h,w]

} // namespace pixagg
