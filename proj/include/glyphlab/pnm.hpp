#pragma once

#include <filesystem>

#include "glyphlab/image.hpp"

namespace glyphlab {

// Binary PGM (P5) and PPM (P6), maxval 255. Comments after the magic are
// skipped on read; writes are bit-exact fixtures: magic, "W H", "255", raw
// samples.

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

// Dispatches on the file's magic: P5 loads directly, P6 goes through
// to_grayscale.
GrayImage read_scan(const std::filesystem::path& path);

// Debug rendering of a binary image (ink -> 0, background -> 255).
GrayImage to_gray(const BinaryImage& img);

}  // namespace glyphlab
