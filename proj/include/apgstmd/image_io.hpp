#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apgstmd/core.hpp"

namespace apgstmd {

struct GrayImage {
    int width = 0;
    int height = 0;
    int max_value = 255;
    std::vector<std::uint16_t> pixels;
};

/// Binary PGM (P5), 8- or 16-bit. Comments in the header are skipped.
GrayImage read_pgm(const std::filesystem::path& path);
/// 8-bit grayscale PNG.
GrayImage read_png(const std::filesystem::path& path);
/// Dispatch on extension (.pgm / .png, case-insensitive).
GrayImage read_image(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Frame -> 8-bit PGM, values rounded and clamped to [0,255].
void write_frame_pgm(const std::filesystem::path& path, const Frame& frame);
/// Arbitrary non-negative grid -> 16-bit PGM scaled linearly to its max.
/// Returns the max used for scaling (0 for an all-zero grid).
double write_scaled_pgm16(const std::filesystem::path& path, int width, int height,
                          const std::vector<double>& values);

Frame frame_from_image(const GrayImage& image, double t_ms);

}  // namespace apgstmd
