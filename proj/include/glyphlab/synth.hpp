#pragma once

#include <cstdint>
#include <vector>

#include "glyphlab/dataset.hpp"
#include "glyphlab/image.hpp"

namespace glyphlab {

// Stroke skeleton in the unit square (x right, y down): open polylines plus
// stamped dots. Dots carry a radius factor relative to the stroke width.
struct GlyphTemplate {
    std::vector<std::vector<std::pair<double, double>>> strokes;
    std::vector<std::pair<double, double>> dots;
    double dot_scale = 1.25;
};

// The 50 built-in skeletons, in canonical class order.
const std::vector<GlyphTemplate>& glyph_templates();

inline constexpr std::size_t kCellCanvas = 44;

// One handwritten-style cell for (writer, class): the skeleton under the
// writer's affine style (rotation up to +-15 deg, scale +-10%, shear),
// per-sample stroke-width variation, a smooth elastic displacement field,
// and a few salt specks. Deterministic: every random draw comes from streams
// derived by splitting the master seed per (writer, class), so results do
// not depend on generation order.
BinaryImage synth_cell(std::uint64_t seed, int writer_id, int class_id);

// One sample per (writer, class) over the selected classes, normalized to
// 28x28. Throws std::invalid_argument on an empty class set or
// n_writers < 1.
LabeledDataset synth_generate(int n_writers, const std::vector<int>& classes,
                              std::uint64_t seed);

// All 50 classes.
LabeledDataset synth_generate(int n_writers, std::uint64_t seed);

// A full ruled 5x10 form for one writer, for exercising the scan-ingestion
// path.
BinaryImage synth_form(std::uint64_t seed, int writer_id);

}  // namespace glyphlab
