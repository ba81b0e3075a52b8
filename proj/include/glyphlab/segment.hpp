#pragma once

#include <string>
#include <vector>

#include "glyphlab/image.hpp"
#include "glyphlab/tensor.hpp"

namespace glyphlab {

// Form layout: 5 rows x 10 columns. Reading order is rows top-to-bottom and
// right-to-left within a row, so cell index i lives at grid column
// 9 - (i % 10). Index i is the canonical class i.
inline constexpr std::size_t kFormRows = 5;
inline constexpr std::size_t kFormCols = 10;
inline constexpr std::size_t kFormCells = kFormRows * kFormCols;

// Pixels stripped from each side of a cell interior to remove rule-line
// bleed.
inline constexpr std::size_t kCellMargin = 2;
// Noise rejection: fewer ink pixels than this, or more than 30% of ink on the
// cell border, flags the cell discardable.
inline constexpr std::size_t kMinInkPixels = 10;
inline constexpr double kBorderInkMaxFraction = 0.30;

struct RuleLine {
    std::size_t begin = 0;  // first row/column of the line band
    std::size_t end = 0;    // one past the last
};

struct FormGrid {
    bool borderless = false;
    std::vector<RuleLine> h_lines;  // 6 when ruled
    std::vector<RuleLine> v_lines;  // 11 when ruled
};

// Locates rule lines from ink-density projection profiles (a line is a band
// of rows/columns whose ink fraction exceeds 0.6). A form with no such bands
// in either direction is treated as borderless and divided uniformly.
// Throws DataError with the observed counts when the bands match neither
// 6 horizontal / 11 vertical nor 0 / 0.
FormGrid detect_grid(const BinaryImage& form);

struct SegmentedCell {
    BinaryImage image;
    bool discard = false;
    std::string reason;  // set when discard is true
};

// Cuts a form into its 50 cells in canonical class order. Cell interiors are
// inset by kCellMargin on every side.
std::vector<SegmentedCell> segment_form(const BinaryImage& form);

// Inverse of segment_form for synthetic fixtures: lays 50 equally sized
// cells into a ruled 5x10 table. Cells sit kCellMargin inside the rule
// lines, so segment_form recovers them exactly.
BinaryImage compose_form(const std::vector<BinaryImage>& cells, std::size_t line_width = 2);

// Tight-crops the ink, pads to square plus a 2-pixel margin, and bilinearly
// resamples to 28x28 with ink = 1. Throws std::invalid_argument on a blank
// cell.
Tensor normalize_cell(const BinaryImage& cell);

inline constexpr std::size_t kGlyphSize = 28;

}  // namespace glyphlab
