#pragma once

#include <filesystem>
#include <string>

#include "pixagg/tensor.hpp"

namespace pixagg {

// Raw tensor file: magic "PXT1", u32 rank, u32 dims[rank], little-endian
// f32 payload, row-major.
void write_pxt(const std::filesystem::path& path, const Tensor& t);
Tensor read_pxt(const std::filesystem::path& path);

// Binary PGM (P5); maxval 255 or 65535. Values normalized by maxval on
// read; quantized to the given maxval on write (input clamped to [0,1]).
void write_pgm(const std::filesystem::path& path, const Tensor& image, int maxval = 255);
Tensor read_pgm(const std::filesystem::path& path);

} // namespace pixagg
