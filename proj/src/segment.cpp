#include "glyphlab/segment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "glyphlab/error.hpp"

namespace glyphlab {

namespace {

constexpr double kLineDensity = 0.6;

// Groups consecutive high-density indices into line bands.
std::vector<RuleLine> find_bands(const std::vector<double>& density) {
    std::vector<RuleLine> bands;
    std::size_t i = 0;
    while (i < density.size()) {
        if (density[i] >= kLineDensity) {
            std::size_t j = i;
            while (j < density.size() && density[j] >= kLineDensity) ++j;
            bands.push_back({i, j});
            i = j;
        } else {
            ++i;
        }
    }
    return bands;
}

struct Region {
    std::size_t r0, r1, c0, c1;  // half-open
};

BinaryImage crop(const BinaryImage& form, const Region& reg) {
    BinaryImage out(reg.c1 - reg.c0, reg.r1 - reg.r0);
    for (std::size_t r = reg.r0; r < reg.r1; ++r)
        for (std::size_t c = reg.c0; c < reg.c1; ++c)
            out.at(r - reg.r0, c - reg.c0) = form.at(r, c);
    return out;
}

void flag_noise(SegmentedCell& cell) {
    const std::size_t ink = cell.image.ink_count();
    if (ink < kMinInkPixels) {
        cell.discard = true;
        cell.reason = "ink below noise floor (" + std::to_string(ink) + " px)";
        return;
    }
    std::size_t border_ink = 0;
    const std::size_t h = cell.image.height, w = cell.image.width;
    for (std::size_t c = 0; c < w; ++c)
        border_ink += cell.image.at(0, c) + cell.image.at(h - 1, c);
    for (std::size_t r = 1; r + 1 < h; ++r)
        border_ink += cell.image.at(r, 0) + cell.image.at(r, w - 1);
    if (static_cast<double>(border_ink) > kBorderInkMaxFraction * static_cast<double>(ink)) {
        cell.discard = true;
        cell.reason = "rule-line bleed (border ink " + std::to_string(border_ink) + "/" +
                      std::to_string(ink) + ")";
    }
}

}  // namespace

FormGrid detect_grid(const BinaryImage& form) {
    if (form.width < kFormCols || form.height < kFormRows)
        throw DataError("segment: form smaller than the grid");

    std::vector<double> row_density(form.height, 0.0), col_density(form.width, 0.0);
    std::vector<std::size_t> col_ink(form.width, 0);
    for (std::size_t r = 0; r < form.height; ++r) {
        std::size_t ink = 0;
        for (std::size_t c = 0; c < form.width; ++c) {
            const auto p = form.at(r, c);
            ink += p;
            col_ink[c] += p;
        }
        row_density[r] = static_cast<double>(ink) / static_cast<double>(form.width);
    }
    for (std::size_t c = 0; c < form.width; ++c)
        col_density[c] = static_cast<double>(col_ink[c]) / static_cast<double>(form.height);

    FormGrid grid;
    grid.h_lines = find_bands(row_density);
    grid.v_lines = find_bands(col_density);

    if (grid.h_lines.empty() && grid.v_lines.empty()) {
        grid.borderless = true;
        return grid;
    }
    if (grid.h_lines.size() != kFormRows + 1 || grid.v_lines.size() != kFormCols + 1) {
        throw DataError("segment: grid detection failed, found " +
                        std::to_string(grid.h_lines.size()) + " horizontal / " +
                        std::to_string(grid.v_lines.size()) +
                        " vertical rule lines (expected 6/11 or borderless)");
    }
    return grid;
}

std::vector<SegmentedCell> segment_form(const BinaryImage& form) {
    const FormGrid grid = detect_grid(form);

    // Interior spans between rule lines (or a uniform division when
    // borderless).
    std::vector<std::pair<std::size_t, std::size_t>> row_spans, col_spans;
    if (grid.borderless) {
        for (std::size_t r = 0; r < kFormRows; ++r)
            row_spans.push_back({r * form.height / kFormRows, (r + 1) * form.height / kFormRows});
        for (std::size_t c = 0; c < kFormCols; ++c)
            col_spans.push_back({c * form.width / kFormCols, (c + 1) * form.width / kFormCols});
    } else {
        for (std::size_t r = 0; r < kFormRows; ++r)
            row_spans.push_back({grid.h_lines[r].end, grid.h_lines[r + 1].begin});
        for (std::size_t c = 0; c < kFormCols; ++c)
            col_spans.push_back({grid.v_lines[c].end, grid.v_lines[c + 1].begin});
    }

    std::vector<SegmentedCell> cells(kFormCells);
    for (std::size_t i = 0; i < kFormCells; ++i) {
        const std::size_t row = i / kFormCols;
        const std::size_t col = kFormCols - 1 - (i % kFormCols);  // right-to-left
        Region reg{row_spans[row].first, row_spans[row].second,
                   col_spans[col].first, col_spans[col].second};
        if (reg.r1 - reg.r0 <= 2 * kCellMargin || reg.c1 - reg.c0 <= 2 * kCellMargin)
            throw DataError("segment: cell interior too small after margin erosion");
        reg.r0 += kCellMargin;
        reg.r1 -= kCellMargin;
        reg.c0 += kCellMargin;
        reg.c1 -= kCellMargin;
        cells[i].image = crop(form, reg);
        flag_noise(cells[i]);
    }
    return cells;
}

BinaryImage compose_form(const std::vector<BinaryImage>& cells, std::size_t line_width) {
    if (cells.size() != kFormCells)
        throw std::invalid_argument("compose_form: expected 50 cells");
    const std::size_t cw = cells[0].width, ch = cells[0].height;
    for (const auto& c : cells)
        if (c.width != cw || c.height != ch)
            throw std::invalid_argument("compose_form: cells must share one size");

    const std::size_t inner_w = cw + 2 * kCellMargin;
    const std::size_t inner_h = ch + 2 * kCellMargin;
    BinaryImage form((kFormCols + 1) * line_width + kFormCols * inner_w,
                     (kFormRows + 1) * line_width + kFormRows * inner_h);

    // Rule lines.
    for (std::size_t b = 0; b <= kFormRows; ++b) {
        const std::size_t r0 = b * (line_width + inner_h);
        for (std::size_t r = r0; r < r0 + line_width; ++r)
            for (std::size_t c = 0; c < form.width; ++c) form.at(r, c) = 1;
    }
    for (std::size_t b = 0; b <= kFormCols; ++b) {
        const std::size_t c0 = b * (line_width + inner_w);
        for (std::size_t c = c0; c < c0 + line_width; ++c)
            for (std::size_t r = 0; r < form.height; ++r) form.at(r, c) = 1;
    }

    // Cells, placed kCellMargin inside their interior.
    for (std::size_t i = 0; i < kFormCells; ++i) {
        const std::size_t row = i / kFormCols;
        const std::size_t col = kFormCols - 1 - (i % kFormCols);
        const std::size_t r0 = line_width + row * (line_width + inner_h) + kCellMargin;
        const std::size_t c0 = line_width + col * (line_width + inner_w) + kCellMargin;
        for (std::size_t r = 0; r < ch; ++r)
            for (std::size_t c = 0; c < cw; ++c)
                if (cells[i].at(r, c)) form.at(r0 + r, c0 + c) = 1;
    }
    return form;
}

Tensor normalize_cell(const BinaryImage& cell) {
    std::size_t rmin = cell.height, rmax = 0, cmin = cell.width, cmax = 0;
    bool any = false;
    for (std::size_t r = 0; r < cell.height; ++r) {
        for (std::size_t c = 0; c < cell.width; ++c) {
            if (cell.at(r, c)) {
                any = true;
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
                cmin = std::min(cmin, c);
                cmax = std::max(cmax, c);
            }
        }
    }
    if (!any) throw std::invalid_argument("normalize_cell: blank cell");

    const std::size_t bh = rmax - rmin + 1, bw = cmax - cmin + 1;
    const std::size_t side = std::max(bh, bw);
    const std::size_t canvas = side + 4;  // 2-pixel margin each side
    const std::size_t ro = 2 + (side - bh) / 2, co = 2 + (side - bw) / 2;

    std::vector<double> field(canvas * canvas, 0.0);
    for (std::size_t r = 0; r < bh; ++r)
        for (std::size_t c = 0; c < bw; ++c)
            field[(ro + r) * canvas + (co + c)] = cell.at(rmin + r, cmin + c) ? 1.0 : 0.0;

    Tensor out({kGlyphSize, kGlyphSize});
    const double scale = static_cast<double>(canvas) / static_cast<double>(kGlyphSize);
    const double last = static_cast<double>(canvas - 1);
    for (std::size_t i = 0; i < kGlyphSize; ++i) {
        const double sy = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, last);
        const std::size_t y0 = static_cast<std::size_t>(sy);
        const std::size_t y1 = std::min(y0 + 1, canvas - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t j = 0; j < kGlyphSize; ++j) {
            const double sx = std::clamp((static_cast<double>(j) + 0.5) * scale - 0.5, 0.0, last);
            const std::size_t x0 = static_cast<std::size_t>(sx);
            const std::size_t x1 = std::min(x0 + 1, canvas - 1);
            const double fx = sx - static_cast<double>(x0);
            const double top = field[y0 * canvas + x0] * (1.0 - fx) + field[y0 * canvas + x1] * fx;
            const double bot = field[y1 * canvas + x0] * (1.0 - fx) + field[y1 * canvas + x1] * fx;
            out.at(i, j) = top * (1.0 - fy) + bot * fy;
        }
    }
    return out;
}

}  // namespace glyphlab
