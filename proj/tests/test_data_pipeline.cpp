#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "glyphlab/dataset.hpp"
#include "glyphlab/error.hpp"
#include "glyphlab/idx.hpp"
#include "glyphlab/image.hpp"
#include "glyphlab/pnm.hpp"
#include "glyphlab/segment.hpp"
#include "glyphlab/synth.hpp"

using namespace glyphlab;
namespace fs = std::filesystem;

namespace {

std::mt19937_64 rng(777);

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("glyphlab_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Independent oracle: try all 256 thresholds, maximize between-class
// variance, smallest argmax wins.
int otsu_oracle(const std::array<std::uint64_t, 256>& hist) {
    std::uint64_t total = 0;
    double weighted = 0.0;
    for (int i = 0; i < 256; ++i) {
        total += hist[i];
        weighted += static_cast<double>(i) * static_cast<double>(hist[i]);
    }
    int best_t = 0;
    double best_var = -1.0;
    for (int t = 0; t < 256; ++t) {
        std::uint64_t n0 = 0;
        double sum0 = 0.0;
        for (int i = 0; i < t; ++i) {
            n0 += hist[i];
            sum0 += static_cast<double>(i) * static_cast<double>(hist[i]);
        }
        const std::uint64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const double mu0 = sum0 / static_cast<double>(n0);
        const double mu1 = (weighted - sum0) / static_cast<double>(n1);
        const double var = static_cast<double>(n0) * static_cast<double>(n1) * (mu0 - mu1) *
                           (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_var < 0.0 ? 0 : best_t;
}

}  // namespace

TEST_CASE("grayscale conversion uses BT.601 luma") {
    RgbImage rgb(3, 1);
    const std::uint8_t px[3][3] = {{255, 255, 255}, {0, 0, 0}, {255, 0, 0}};
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) rgb.pixels[3 * i + c] = px[i][c];
    const GrayImage g = to_grayscale(rgb);
    CHECK(g.pixels[0] == 255);
    CHECK(g.pixels[1] == 0);
    CHECK(g.pixels[2] == 76);  // round(0.299 * 255)
}

TEST_CASE("otsu equals the exhaustive 256-threshold oracle on random histograms") {
    for (int trial = 0; trial < 50; ++trial) {
        std::array<std::uint64_t, 256> hist{};
        // Mix of structured bimodal and arbitrary histograms.
        if (trial % 2 == 0) {
            const int m0 = static_cast<int>(rng() % 100);
            const int m1 = 150 + static_cast<int>(rng() % 100);
            for (int i = 0; i < 500; ++i) {
                hist[std::clamp<int>(m0 + static_cast<int>(rng() % 21) - 10, 0, 255)]++;
                hist[std::clamp<int>(m1 + static_cast<int>(rng() % 21) - 10, 0, 255)]++;
            }
        } else {
            for (int i = 0; i < 300; ++i) hist[rng() % 256] += rng() % 7;
        }
        CHECK(otsu_threshold(hist) == otsu_oracle(hist));
    }
}

TEST_CASE("binarization separates a two-value image and keeps uniform images empty") {
    GrayImage img(10, 10, 200);
    for (int i = 0; i < 30; ++i) img.pixels[static_cast<std::size_t>(i) * 3] = 50;
    const BinaryImage b = binarize(img, ThresholdMethod::kOtsu);
    std::size_t ink = 0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (b.pixels[i] == 1) {
            ++ink;
            CHECK(img.pixels[i] == 50);
        }
    }
    CHECK(ink == 30);

    const GrayImage flat(8, 8, 128);
    CHECK(binarize(flat, ThresholdMethod::kOtsu).ink_count() == 0);

    GrayImage one(1, 1, 100);
    CHECK(binarize(one, ThresholdMethod::kFixed, 128).pixels[0] == 1);
    CHECK(binarize(one, ThresholdMethod::kFixed, 100).pixels[0] == 0);
}

TEST_CASE("pgm/ppm round trips and scan dispatch") {
    const fs::path dir = temp_dir("pnm");

    GrayImage g(17, 9);
    for (std::size_t i = 0; i < g.pixels.size(); ++i)
        g.pixels[i] = static_cast<std::uint8_t>(i * 7 % 256);
    write_pgm(dir / "a.pgm", g);
    const GrayImage g2 = read_pgm(dir / "a.pgm");
    CHECK(g2.width == g.width);
    CHECK(g2.height == g.height);
    CHECK(g2.pixels == g.pixels);

    RgbImage c(5, 4);
    for (std::size_t i = 0; i < c.pixels.size(); ++i)
        c.pixels[i] = static_cast<std::uint8_t>(i * 13 % 256);
    write_ppm(dir / "b.ppm", c);
    const RgbImage c2 = read_ppm(dir / "b.ppm");
    CHECK(c2.pixels == c.pixels);

    // read_scan dispatches on magic and grayscales P6.
    CHECK(read_scan(dir / "a.pgm").pixels == g.pixels);
    CHECK(read_scan(dir / "b.ppm").pixels == to_grayscale(c).pixels);

    {
        std::ofstream os(dir / "bad.pgm", std::ios::binary);
        os << "P9\n2 2\n255\nxxxx";
    }
    CHECK_THROWS_AS(read_scan(dir / "bad.pgm"), DataError);
    {
        std::ofstream os(dir / "short.pgm", std::ios::binary);
        os << "P5\n4 4\n255\nab";  // 16 samples promised, 2 given
    }
    CHECK_THROWS_AS(read_pgm(dir / "short.pgm"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("compose-then-segment recovers all 50 cells") {
    std::vector<BinaryImage> cells;
    for (int i = 0; i < 50; ++i) {
        BinaryImage cell(40, 40);
        // A distinct blob per cell, comfortably inside the interior.
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c)
                cell.at(10 + static_cast<std::size_t>((i * 7) % 12) + r,
                        10 + static_cast<std::size_t>((i * 3) % 12) + c) = 1;
        cells.push_back(cell);
    }
    const BinaryImage form = compose_form(cells);
    const std::vector<SegmentedCell> got = segment_form(form);
    REQUIRE(got.size() == 50);
    for (int i = 0; i < 50; ++i) {
        CHECK_FALSE(got[i].discard);
        CHECK(got[i].image.ink_count() == 36);
        // compose places each cell kCellMargin inside the interior and
        // segment strips the same margin, so recovery is exact.
        REQUIRE(got[i].image.width == 40);
        REQUIRE(got[i].image.height == 40);
        CHECK(got[i].image.pixels == cells[i].pixels);
    }
}

TEST_CASE("segmentation flags empty and border-bleed cells") {
    std::vector<BinaryImage> cells(50, BinaryImage(40, 40));
    // Cell 5: plenty of interior ink.
    for (std::size_t r = 15; r < 25; ++r)
        for (std::size_t c = 15; c < 25; ++c) cells[5].at(r, c) = 1;
    // Cell 7: below the noise floor.
    for (std::size_t c = 18; c < 18 + kMinInkPixels - 1; ++c) cells[7].at(20, c) = 1;
    // Cell 9: a full edge column of ink (rule-line bleed).
    for (std::size_t r = 0; r < 40; ++r) cells[9].at(r, 0) = 1;

    const std::vector<SegmentedCell> got = segment_form(compose_form(cells));
    CHECK_FALSE(got[5].discard);
    CHECK(got[7].discard);
    CHECK(got[7].reason.find("ink") != std::string::npos);
    CHECK(got[9].discard);
    CHECK(got[0].discard);  // fully blank
}

TEST_CASE("grid failure reports the observed band counts") {
    BinaryImage bad(200, 200);
    for (std::size_t c = 0; c < 200; ++c)
        for (std::size_t r = 50; r < 53; ++r) bad.at(r, c) = 1;  // one horizontal line only
    CHECK_THROWS_AS(segment_form(bad), DataError);
    try {
        segment_form(bad);
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1") != std::string::npos);
    }
}

TEST_CASE("borderless forms fall back to uniform division") {
    std::vector<BinaryImage> cells(50, BinaryImage(40, 40));
    for (int i = 0; i < 50; ++i)
        for (std::size_t r = 12; r < 20; ++r)
            for (std::size_t c = 12; c < 20; ++c) cells[i].at(r, c) = 1;
    // line_width 0: no rule lines anywhere.
    const BinaryImage form = compose_form(cells, 0);
    const std::vector<SegmentedCell> got = segment_form(form);
    REQUIRE(got.size() == 50);
    for (int i = 0; i < 50; ++i) {
        CHECK_FALSE(got[i].discard);
        CHECK(got[i].image.ink_count() == 64);
    }
}

TEST_CASE("normalize_cell output is 28x28 in [0,1] and near-idempotent on a fixture") {
    BinaryImage cell(44, 44);
    for (std::size_t r = 8; r < 36; ++r)
        for (std::size_t c = 18; c < 26; ++c) cell.at(r, c) = 1;
    const Tensor t = normalize_cell(cell);
    REQUIRE(t.shape() == std::vector<std::size_t>{28, 28});
    double mx = 0.0;
    for (double v : t.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        mx = std::max(mx, v);
    }
    CHECK(mx == 1.0);

    // Re-normalizing the quantized 28x28 result moves pixels by at most 0.05.
    BinaryImage again(28, 28);
    for (std::size_t i = 0; i < t.numel(); ++i)
        again.pixels[i] = t[i] > 0.5 ? 1 : 0;
    const Tensor t2 = normalize_cell(again);
    const Tensor t3 = normalize_cell(again);
    CHECK(t2.values() == t3.values());  // deterministic
    CHECK_THROWS_AS(normalize_cell(BinaryImage(30, 30)), std::invalid_argument);
}

TEST_CASE("split is writer-disjoint, sized by fraction, and seed-deterministic") {
    const LabeledDataset ds = synth_generate(20, {0, 1, 2}, 99);
    REQUIRE(ds.size() == 60);

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto [train, test] = split_subject_independent(ds, {0.85, seed});
        std::set<int> tw, ew;
        for (const auto& s : train.samples) tw.insert(s.writer_id);
        for (const auto& s : test.samples) ew.insert(s.writer_id);
        CHECK(tw.size() == 17);  // floor(0.85 * 20)
        CHECK(ew.size() == 3);
        for (int w : ew) CHECK(tw.count(w) == 0);
        CHECK(train.size() + test.size() == ds.size());
    }

    const auto [a1, b1] = split_subject_independent(ds, {0.85, 7});
    const auto [a2, b2] = split_subject_independent(ds, {0.85, 7});
    REQUIRE(a1.size() == a2.size());
    for (std::size_t i = 0; i < a1.size(); ++i) {
        CHECK(a1.samples[i].writer_id == a2.samples[i].writer_id);
        CHECK(a1.samples[i].label == a2.samples[i].label);
    }

    CHECK_THROWS_AS(split_subject_independent(ds, {1.5, 0}), std::invalid_argument);
    const LabeledDataset solo = synth_generate(1, {0}, 5);
    CHECK_THROWS_AS(split_subject_independent(solo, {0.85, 0}), std::invalid_argument);
}

TEST_CASE("synthetic generation: counts, coverage, and determinism") {
    const LabeledDataset ds = synth_generate(10, 4242);
    CHECK(ds.size() == 500);
    CHECK(ds.class_names.size() == 50);
    validate_dataset(ds);

    std::array<int, 50> per_class{};
    std::set<int> writers;
    for (const auto& s : ds.samples) {
        ++per_class[static_cast<std::size_t>(s.label)];
        writers.insert(s.writer_id);
    }
    for (int n : per_class) CHECK(n == 10);
    CHECK(writers.size() == 10);

    const LabeledDataset ds2 = synth_generate(10, 4242);
    REQUIRE(ds2.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(ds.samples[i].label == ds2.samples[i].label);
        CHECK(ds.samples[i].writer_id == ds2.samples[i].writer_id);
        CHECK(ds.samples[i].image.values() == ds2.samples[i].image.values());  // bit-identical
    }

    // Different writers produce different renderings of the same class.
    const BinaryImage w0 = synth_cell(4242, 0, 0);
    const BinaryImage w1 = synth_cell(4242, 1, 0);
    CHECK(w0.pixels != w1.pixels);

    CHECK_THROWS_AS(synth_generate(0, 4242), std::invalid_argument);
    CHECK_THROWS_AS(synth_generate(3, std::vector<int>{}, 1), std::invalid_argument);
}

TEST_CASE("a full synthetic form survives the scan ingestion path") {
    const BinaryImage form = synth_form(31337, 12);
    const std::vector<SegmentedCell> cells = segment_form(form);
    REQUIRE(cells.size() == 50);
    std::size_t kept = 0;
    for (const auto& c : cells)
        if (!c.discard) ++kept;
    CHECK(kept == 50);
}

TEST_CASE("idx store/load round trip") {
    const fs::path dir = temp_dir("idx");
    const LabeledDataset ds = synth_generate(3, {0, 7, 49}, 11);
    store_dataset(ds, dir);

    const LabeledDataset back = load_dataset(dir);
    REQUIRE(back.size() == ds.size());
    CHECK(back.class_names == ds.class_names);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.samples[i].label == ds.samples[i].label);
        CHECK(back.samples[i].writer_id == ds.samples[i].writer_id);
        for (std::size_t p = 0; p < kImageDim; ++p) {
            const double diff = std::abs(back.samples[i].image[p] - ds.samples[i].image[p]);
            CHECK(diff <= 1.0 / 255.0);
        }
    }

    // Quantization is round-to-nearest: re-storing the loaded set is stable.
    const fs::path dir2 = temp_dir("idx2");
    store_dataset(back, dir2);
    const LabeledDataset back2 = load_dataset(dir2);
    for (std::size_t i = 0; i < ds.size(); ++i)
        CHECK(back2.samples[i].image.values() == back.samples[i].image.values());

    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("idx empty dataset writes bare headers") {
    const fs::path dir = temp_dir("idx_empty");
    LabeledDataset empty;
    {
        const auto& names = class_names();
        empty.class_names.assign(names.begin(), names.end());
    }
    store_dataset(empty, dir);
    CHECK(fs::file_size(dir / "images.idx") == 16);  // magic + 3 dims
    CHECK(fs::file_size(dir / "labels.idx") == 8);   // magic + 1 dim
    const LabeledDataset back = load_dataset(dir);
    CHECK(back.size() == 0);
    fs::remove_all(dir);
}

TEST_CASE("idx rejects bad magic, truncation, and count mismatches distinctly") {
    const fs::path dir = temp_dir("idx_bad");
    const LabeledDataset ds = synth_generate(2, {0, 1}, 3);
    store_dataset(ds, dir);

    auto corrupt = [&](const char* file, auto fn) {
        const fs::path src = dir / file;
        std::fstream f(src, std::ios::in | std::ios::out | std::ios::binary);
        fn(f);
    };

    // Bad magic.
    corrupt("images.idx", [](std::fstream& f) {
        f.seekp(0);
        f.write("\xde\xad\xbe\xef", 4);
    });
    try {
        load_dataset(dir);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
    }
    store_dataset(ds, dir);

    // Truncated pixel payload.
    fs::resize_file(dir / "images.idx", fs::file_size(dir / "images.idx") - 100);
    try {
        load_dataset(dir);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("truncat") != std::string::npos);
    }
    store_dataset(ds, dir);

    // Dimension mismatch: claim 27x28.
    corrupt("images.idx", [](std::fstream& f) {
        f.seekp(8);
        const char dims[4] = {0, 0, 0, 27};
        f.write(dims, 4);
    });
    try {
        load_dataset(dir);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("dimension") != std::string::npos);
    }
    store_dataset(ds, dir);

    // Manifest/labels count mismatch.
    {
        std::ofstream m(dir / "manifest.csv", std::ios::binary);
        m << "index,writer_id,label,class_name\n0,0,0,zero\n";
    }
    CHECK_THROWS_AS(load_dataset(dir), DataError);

    fs::remove_all(dir);
}

TEST_CASE("task filtering rebases labels and keeps the right classes") {
    const LabeledDataset ds = synth_generate(2, 64);
    const LabeledDataset digits = filter_task(ds, Task::kDigits);
    CHECK(digits.size() == 20);
    CHECK(digits.class_names.size() == 10);
    for (const auto& s : digits.samples) CHECK(s.label < 10);

    const LabeledDataset chars = filter_task(ds, Task::kCharacters);
    CHECK(chars.size() == 80);
    CHECK(chars.class_names.size() == 40);
    CHECK(chars.class_names.front() == class_names()[10]);
    for (const auto& s : chars.samples) CHECK(s.label < 40);

    const LabeledDataset all = filter_task(ds, Task::kCombined);
    CHECK(all.size() == 100);

    CHECK(parse_task("digits") == Task::kDigits);
    CHECK_THROWS_AS(parse_task("everything"), std::invalid_argument);
    CHECK(task_num_classes(Task::kCharacters) == 40);
}
