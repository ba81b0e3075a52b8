#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace glyphlab {

// 8-bit grayscale raster, row-major. On scanned input 0 is black ink and 255
// is white paper.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 255)
        : width(w), height(h), pixels(w * h, fill) {}

    std::uint8_t& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

// 8-bit RGB raster, row-major, interleaved.
struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // 3 * width * height

    RgbImage() = default;
    RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(3 * w * h, 255) {}
};

// Binary raster with ink = 1, background = 0.
struct BinaryImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // values 0/1

    BinaryImage() = default;
    BinaryImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h, 0) {}

    std::uint8_t& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }

    std::size_t ink_count() const {
        std::size_t n = 0;
        for (auto p : pixels) n += p;
        return n;
    }
};

// ITU-R BT.601 luma: round(0.299 R + 0.587 G + 0.114 B).
GrayImage to_grayscale(const RgbImage& rgb);

// Otsu's threshold over all 256 candidates: picks the smallest t maximizing
// the between-class variance of {pixel < t} vs {pixel >= t}. A uniform image
// yields t = 0, i.e. an empty foreground.
int otsu_threshold(const std::array<std::uint64_t, 256>& histogram);
int otsu_threshold(const GrayImage& img);

enum class ThresholdMethod { kOtsu, kFixed };

// pixel < threshold => ink(1), else background(0).
BinaryImage binarize(const GrayImage& img, ThresholdMethod method, int fixed_threshold = 128);

}  // namespace glyphlab
