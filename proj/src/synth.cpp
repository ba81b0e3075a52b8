#include "glyphlab/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "glyphlab/segment.hpp"
#include "glyphlab/util.hpp"

namespace glyphlab {

namespace {

using Point = std::pair<double, double>;
using Polyline = std::vector<Point>;

Polyline circle(double cx, double cy, double r, int n = 20) {
    Polyline p;
    p.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        p.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    return p;
}

std::vector<GlyphTemplate> build_templates() {
    std::vector<GlyphTemplate> t(kNumClasses);

    // Digits 0..9.
    t[0].dots = {{0.50, 0.52}};
    t[0].dot_scale = 2.1;  // the zero is a heavy dot
    t[1].strokes = {{{0.56, 0.14}, {0.47, 0.86}}};
    t[2].strokes = {{{0.34, 0.32}, {0.42, 0.17}, {0.56, 0.14}, {0.66, 0.23}},
                    {{0.66, 0.23}, {0.63, 0.52}, {0.55, 0.85}}};
    t[3].strokes = {{{0.30, 0.30}, {0.39, 0.16}, {0.48, 0.30}, {0.57, 0.16}, {0.66, 0.28}},
                    {{0.66, 0.28}, {0.62, 0.55}, {0.54, 0.85}}};
    t[4].strokes = {{{0.52, 0.14}, {0.34, 0.30}, {0.50, 0.46}, {0.68, 0.32}, {0.52, 0.14}},
                    {{0.50, 0.46}, {0.44, 0.66}, {0.40, 0.86}}};
    t[5].strokes = {circle(0.50, 0.50, 0.26), {{0.50, 0.24}, {0.56, 0.14}}};
    t[6].strokes = {{{0.62, 0.16}, {0.44, 0.20}, {0.34, 0.34}, {0.48, 0.42}, {0.60, 0.36}},
                    {{0.60, 0.36}, {0.58, 0.62}, {0.50, 0.86}}};
    t[7].strokes = {{{0.28, 0.22}, {0.50, 0.72}, {0.72, 0.22}}};
    t[8].strokes = {{{0.28, 0.78}, {0.50, 0.26}, {0.72, 0.78}}};
    t[9].strokes = {circle(0.52, 0.34, 0.16), {{0.68, 0.36}, {0.64, 0.62}, {0.56, 0.86}}};

    // Alif, Mad.
    t[10].strokes = {{{0.52, 0.10}, {0.50, 0.90}}};
    t[11].strokes = {{{0.52, 0.22}, {0.50, 0.92}},
                     {{0.30, 0.16}, {0.40, 0.07}, {0.52, 0.13}, {0.62, 0.05}}};

    // Baa family: shared bowl, distinguished by dots.
    const Polyline bowl = {{0.14, 0.38}, {0.16, 0.58}, {0.30, 0.70}, {0.50, 0.74},
                           {0.70, 0.70}, {0.84, 0.58}, {0.86, 0.38}};
    t[12].strokes = {bowl};
    t[12].dots = {{0.50, 0.88}};
    t[13].strokes = {bowl};
    t[13].dots = {{0.42, 0.84}, {0.58, 0.84}, {0.50, 0.92}};
    t[14].strokes = {bowl, circle(0.50, 0.22, 0.05, 12)};
    t[15].strokes = {bowl};
    t[15].dots = {{0.42, 0.22}, {0.58, 0.22}};
    t[16].strokes = {bowl};
    t[16].dots = {{0.40, 0.24}, {0.60, 0.24}, {0.50, 0.12}};

    // Jeem family.
    const Polyline jeem_bar = {{0.26, 0.24}, {0.56, 0.18}};
    const Polyline jeem_curve = {{0.56, 0.18}, {0.38, 0.36}, {0.28, 0.52},
                                 {0.34, 0.72}, {0.54, 0.80}, {0.72, 0.70}};
    t[17].strokes = {jeem_bar, jeem_curve};
    t[17].dots = {{0.48, 0.52}};
    t[18].strokes = {jeem_bar, jeem_curve};
    t[18].dots = {{0.42, 0.50}, {0.58, 0.50}, {0.50, 0.62}};
    t[19].strokes = {jeem_bar, jeem_curve};
    t[20].strokes = {jeem_bar, jeem_curve};
    t[20].dots = {{0.52, 0.08}};

    // Daal family.
    const Polyline daal = {{0.42, 0.16}, {0.58, 0.30}, {0.64, 0.48}, {0.56, 0.64}, {0.34, 0.70}};
    t[21].strokes = {daal};
    t[22].strokes = {daal};
    t[22].dots = {{0.52, 0.08}};
    t[23].strokes = {daal, circle(0.50, 0.08, 0.05, 12)};

    // Raa family.
    const Polyline raa = {{0.58, 0.24}, {0.64, 0.44}, {0.56, 0.62}, {0.40, 0.74}, {0.24, 0.78}};
    t[24].strokes = {raa};
    t[25].strokes = {raa};
    t[25].dots = {{0.50, 0.10}};
    t[26].strokes = {raa};
    t[26].dots = {{0.40, 0.14}, {0.56, 0.14}, {0.48, 0.05}};
    t[27].strokes = {raa, circle(0.48, 0.10, 0.05, 12)};

    // Seen, Sheen.
    const Polyline seen_teeth = {{0.12, 0.42}, {0.19, 0.28}, {0.26, 0.42}, {0.33, 0.28},
                                 {0.40, 0.42}, {0.47, 0.28}, {0.54, 0.42}};
    const Polyline seen_tail = {{0.54, 0.42}, {0.70, 0.46}, {0.80, 0.58},
                                {0.72, 0.76}, {0.52, 0.82}};
    t[28].strokes = {seen_teeth, seen_tail};
    t[29].strokes = {seen_teeth, seen_tail};
    t[29].dots = {{0.24, 0.14}, {0.40, 0.14}, {0.32, 0.05}};

    // Swad, Zwad.
    t[30].strokes = {circle(0.30, 0.48, 0.12), {{0.42, 0.50}, {0.62, 0.54}, {0.80, 0.50}},
                     {{0.80, 0.50}, {0.76, 0.68}, {0.62, 0.78}}};
    t[31] = t[30];
    t[31].dots = {{0.34, 0.26}};

    // Twa, Zwaa.
    t[32].strokes = {circle(0.38, 0.58, 0.11), {{0.49, 0.60}, {0.78, 0.56}},
                     {{0.74, 0.18}, {0.76, 0.56}}};
    t[33] = t[32];
    t[33].dots = {{0.58, 0.36}};

    // Ayn, Ghain.
    t[34].strokes = {{{0.62, 0.14}, {0.44, 0.18}, {0.36, 0.28}, {0.48, 0.36}, {0.60, 0.34}},
                     {{0.60, 0.34}, {0.38, 0.44}, {0.28, 0.60}, {0.38, 0.78},
                      {0.58, 0.82}, {0.70, 0.72}}};
    t[35] = t[34];
    t[35].dots = {{0.50, 0.07}};

    // Faa, Qaaf.
    t[36].strokes = {circle(0.48, 0.26, 0.08), {{0.56, 0.30}, {0.60, 0.42}},
                     {{0.14, 0.50}, {0.20, 0.62}, {0.44, 0.68}, {0.68, 0.62}, {0.84, 0.50}}};
    t[36].dots = {{0.48, 0.10}};
    t[37].strokes = {circle(0.48, 0.28, 0.08),
                     {{0.20, 0.44}, {0.18, 0.64}, {0.38, 0.78}, {0.62, 0.76}, {0.78, 0.60}}};
    t[37].dots = {{0.40, 0.10}, {0.56, 0.10}};

    // Kaaf, Gaaf.
    t[38].strokes = {{{0.66, 0.14}, {0.58, 0.44}, {0.44, 0.68}, {0.22, 0.76}},
                     {{0.36, 0.30}, {0.60, 0.44}}};
    t[39] = t[38];
    t[39].strokes.push_back({{0.40, 0.20}, {0.64, 0.34}});

    // Laam, Meem, Noon, Gunna.
    t[40].strokes = {{{0.64, 0.12}, {0.66, 0.58}, {0.56, 0.76}, {0.36, 0.80}, {0.24, 0.68}}};
    t[41].strokes = {circle(0.48, 0.36, 0.11), {{0.50, 0.47}, {0.48, 0.88}}};
    const Polyline cup = {{0.24, 0.34}, {0.20, 0.56}, {0.36, 0.74},
                          {0.60, 0.74}, {0.78, 0.56}, {0.80, 0.36}};
    t[42].strokes = {cup};
    t[42].dots = {{0.50, 0.20}};
    t[43].strokes = {cup};

    // Wow, the two Haaw forms, Hamza.
    t[44].strokes = {circle(0.56, 0.32, 0.10), {{0.54, 0.42}, {0.42, 0.62}, {0.26, 0.80}}};
    t[45].strokes = {circle(0.36, 0.52, 0.11), circle(0.62, 0.52, 0.11),
                     {{0.20, 0.68}, {0.80, 0.68}}};
    t[46].strokes = {circle(0.50, 0.54, 0.13), {{0.58, 0.42}, {0.70, 0.26}, {0.68, 0.12}}};
    t[47].strokes = {{{0.58, 0.34}, {0.46, 0.38}, {0.42, 0.50}, {0.52, 0.56}},
                     {{0.52, 0.56}, {0.44, 0.66}}};

    // Choti Yeh, Bari Yeh.
    t[48].strokes = {{{0.68, 0.26}, {0.46, 0.30}, {0.32, 0.44}, {0.38, 0.62},
                      {0.58, 0.70}, {0.74, 0.60}, {0.70, 0.44}, {0.54, 0.42}}};
    t[49].strokes = {{{0.62, 0.22}, {0.42, 0.30}, {0.30, 0.44}},
                     {{0.12, 0.62}, {0.40, 0.70}, {0.70, 0.64}, {0.88, 0.52}}};

    return t;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

struct Affine {
    // Row-major 2x2 plus translation, in pixel coordinates.
    double a, b, c, d, tx, ty;
    Point apply(const Point& p) const {
        return {a * p.first + b * p.second + tx, c * p.first + d * p.second + ty};
    }
};

void stamp_disk(BinaryImage& img, double cx, double cy, double radius) {
    const int r0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int r1 = std::min(static_cast<int>(img.height) - 1,
                            static_cast<int>(std::ceil(cy + radius)));
    const int c0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int c1 = std::min(static_cast<int>(img.width) - 1,
                            static_cast<int>(std::ceil(cx + radius)));
    const double r2 = radius * radius;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dy = static_cast<double>(r) - cy;
            const double dx = static_cast<double>(c) - cx;
            if (dx * dx + dy * dy <= r2)
                img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 1;
        }
    }
}

void draw_polyline(BinaryImage& img, const Polyline& line, const Affine& xf, double radius) {
    if (line.empty()) return;
    Point prev = xf.apply(line[0]);
    stamp_disk(img, prev.first, prev.second, radius);
    for (std::size_t i = 1; i < line.size(); ++i) {
        const Point cur = xf.apply(line[i]);
        const double len = std::hypot(cur.first - prev.first, cur.second - prev.second);
        const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.35)));
        for (int s = 1; s <= steps; ++s) {
            const double f = static_cast<double>(s) / steps;
            stamp_disk(img, prev.first + f * (cur.first - prev.first),
                       prev.second + f * (cur.second - prev.second), radius);
        }
        prev = cur;
    }
}

}  // namespace

const std::vector<GlyphTemplate>& glyph_templates() {
    static const std::vector<GlyphTemplate> templates = build_templates();
    return templates;
}

BinaryImage synth_cell(std::uint64_t seed, int writer_id, int class_id) {
    if (class_id < 0 || class_id >= static_cast<int>(kNumClasses))
        throw std::invalid_argument("synth_cell: class out of range");
    const GlyphTemplate& tpl = glyph_templates()[static_cast<std::size_t>(class_id)];

    // Writer style stream: one handwriting style per writer, shared by all of
    // that writer's samples.
    std::mt19937_64 wrng(mix_seed(seed, static_cast<std::uint64_t>(writer_id), 0xA11CE));
    const double rot_w = uniform(wrng, -15.0, 15.0) * std::numbers::pi / 180.0;
    const double scale_w = uniform(wrng, 0.90, 1.10);
    const double shear_w = uniform(wrng, -0.08, 0.08);
    const double aspect_w = uniform(wrng, 0.95, 1.05);
    const double radius_w = uniform(wrng, 1.45, 2.25);

    // Per-sample stream.
    std::mt19937_64 srng(
        mix_seed(seed, static_cast<std::uint64_t>(writer_id),
                 0xC1A55ULL * 131 + static_cast<std::uint64_t>(class_id)));
    const double rot = rot_w + uniform(srng, -3.0, 3.0) * std::numbers::pi / 180.0;
    const double scale = scale_w * uniform(srng, 0.96, 1.04);
    const double tx = uniform(srng, -1.5, 1.5);
    const double ty = uniform(srng, -1.5, 1.5);
    const double radius = radius_w * uniform(srng, 0.85, 1.15);

    const double n = static_cast<double>(kCellCanvas);
    const double span = 0.82 * n;  // glyph footprint before jitter
    const double cosr = std::cos(rot), sinr = std::sin(rot);
    const double sx = scale * aspect_w * span, sy = scale * span;
    Affine xf;
    // Rotation * shear * scale, applied about the template centre (0.5, 0.5).
    xf.a = cosr * sx + (-sinr) * (shear_w * sx);
    xf.b = -sinr * sy;
    xf.c = sinr * sx + cosr * (shear_w * sx);
    xf.d = cosr * sy;
    xf.tx = n / 2.0 + tx - (xf.a * 0.5 + xf.b * 0.5);
    xf.ty = n / 2.0 + ty - (xf.c * 0.5 + xf.d * 0.5);

    BinaryImage drawn(kCellCanvas, kCellCanvas);
    for (const auto& stroke : tpl.strokes) draw_polyline(drawn, stroke, xf, radius);
    for (const auto& dot : tpl.dots) {
        const Point p = xf.apply(dot);
        stamp_disk(drawn, p.first, p.second, radius * tpl.dot_scale);
    }

    // Smooth elastic displacement (backward warp, nearest sample).
    const double ax = uniform(srng, 0.4, 1.5), lx = uniform(srng, 12.0, 28.0);
    const double px = uniform(srng, 0.0, 2.0 * std::numbers::pi);
    const double ay = uniform(srng, 0.4, 1.5), ly = uniform(srng, 12.0, 28.0);
    const double py = uniform(srng, 0.0, 2.0 * std::numbers::pi);
    BinaryImage cell(kCellCanvas, kCellCanvas);
    for (std::size_t r = 0; r < kCellCanvas; ++r) {
        for (std::size_t c = 0; c < kCellCanvas; ++c) {
            const double dx = ax * std::sin(2.0 * std::numbers::pi * static_cast<double>(r) / lx + px);
            const double dy = ay * std::sin(2.0 * std::numbers::pi * static_cast<double>(c) / ly + py);
            const long sc = std::lround(static_cast<double>(c) + dx);
            const long sr = std::lround(static_cast<double>(r) + dy);
            if (sr >= 0 && sr < static_cast<long>(kCellCanvas) && sc >= 0 &&
                sc < static_cast<long>(kCellCanvas))
                cell.at(r, c) = drawn.at(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
    }

    // Salt specks, kept off the borders.
    const std::size_t specks = srng() % 4;
    for (std::size_t s = 0; s < specks; ++s) {
        const std::size_t r = 6 + srng() % (kCellCanvas - 12);
        const std::size_t c = 6 + srng() % (kCellCanvas - 12);
        cell.at(r, c) = 1;
        if (srng() % 2) cell.at(r, c + 1) = 1;
    }
    return cell;
}

LabeledDataset synth_generate(int n_writers, const std::vector<int>& classes,
                              std::uint64_t seed) {
    if (n_writers < 1) throw std::invalid_argument("synth_generate: n_writers must be >= 1");
    if (classes.empty()) throw std::invalid_argument("synth_generate: empty class set");
    for (int c : classes)
        if (c < 0 || c >= static_cast<int>(kNumClasses))
            throw std::invalid_argument("synth_generate: class out of range");

    LabeledDataset ds;
    ds.class_names.assign(class_names().begin(), class_names().end());
    ds.samples.resize(static_cast<std::size_t>(n_writers) * classes.size());
    parallel_for(static_cast<std::size_t>(n_writers), [&](std::size_t w) {
        for (std::size_t ci = 0; ci < classes.size(); ++ci) {
            Sample& s = ds.samples[w * classes.size() + ci];
            s.writer_id = static_cast<int>(w);
            s.label = classes[ci];
            s.image = normalize_cell(synth_cell(seed, static_cast<int>(w), classes[ci]));
        }
    });
    return ds;
}

LabeledDataset synth_generate(int n_writers, std::uint64_t seed) {
    std::vector<int> all(kNumClasses);
    for (std::size_t i = 0; i < kNumClasses; ++i) all[i] = static_cast<int>(i);
    return synth_generate(n_writers, all, seed);
}

BinaryImage synth_form(std::uint64_t seed, int writer_id) {
    std::vector<BinaryImage> cells;
    cells.reserve(kFormCells);
    for (std::size_t c = 0; c < kFormCells; ++c)
        cells.push_back(synth_cell(seed, writer_id, static_cast<int>(c)));
    return compose_form(cells);
}

}  // namespace glyphlab
