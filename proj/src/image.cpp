#include "glyphlab/image.hpp"

#include <cmath>

namespace glyphlab {

GrayImage to_grayscale(const RgbImage& rgb) {
    GrayImage out(rgb.width, rgb.height);
    for (std::size_t i = 0; i < rgb.width * rgb.height; ++i) {
        const double r = rgb.pixels[3 * i];
        const double g = rgb.pixels[3 * i + 1];
        const double b = rgb.pixels[3 * i + 2];
        const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(luma));
    }
    return out;
}

int otsu_threshold(const std::array<std::uint64_t, 256>& histogram) {
    std::uint64_t total = 0;
    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) {
        total += histogram[v];
        sum_all += static_cast<double>(v) * static_cast<double>(histogram[v]);
    }
    if (total == 0) return 0;

    int best_t = 0;
    double best_var = -1.0;
    std::uint64_t count_below = 0;
    double sum_below = 0.0;
    // Threshold t splits into {v < t} and {v >= t}; t = 0 leaves the
    // foreground empty.
    for (int t = 0; t < 256; ++t) {
        const double w0 = static_cast<double>(count_below);
        const double w1 = static_cast<double>(total - count_below);
        double var = 0.0;
        if (count_below > 0 && count_below < total) {
            const double mean0 = sum_below / w0;
            const double mean1 = (sum_all - sum_below) / w1;
            const double d = mean0 - mean1;
            var = w0 * w1 * d * d;
        }
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
        count_below += histogram[t];
        sum_below += static_cast<double>(t) * static_cast<double>(histogram[t]);
    }
    return best_t;
}

int otsu_threshold(const GrayImage& img) {
    std::array<std::uint64_t, 256> hist{};
    for (auto p : img.pixels) ++hist[p];
    return otsu_threshold(hist);
}

BinaryImage binarize(const GrayImage& img, ThresholdMethod method, int fixed_threshold) {
    const int t = method == ThresholdMethod::kOtsu ? otsu_threshold(img) : fixed_threshold;
    BinaryImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = img.pixels[i] < t ? 1 : 0;
    return out;
}

}  // namespace glyphlab
