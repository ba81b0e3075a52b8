#include "glyphlab/idx.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "glyphlab/error.hpp"

namespace glyphlab {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr std::uint32_t kSide = 28;
static_assert(kSide * kSide == kImageDim);

void write_be32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_be32(std::istream& is, const std::string& file) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError(file + ": truncated file");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
           (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

// Splits a CSV line; fields in the manifest never contain commas or quotes
// except the class name, which may contain anything but a comma.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

void store_dataset(const LabeledDataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::uint32_t count = static_cast<std::uint32_t>(ds.size());

    {
        std::ofstream os(dir / "images.idx", std::ios::binary);
        if (!os) throw DataError("images.idx: cannot open for writing");
        write_be32(os, kImageMagic);
        write_be32(os, count);
        write_be32(os, kSide);
        write_be32(os, kSide);
        std::vector<unsigned char> row(kImageDim);
        for (const Sample& s : ds.samples) {
            const std::vector<double>& v = s.image.values();
            for (std::size_t i = 0; i < kImageDim; ++i)
                row[i] = static_cast<unsigned char>(std::lround(255.0 * v[i]));
            os.write(reinterpret_cast<const char*>(row.data()),
                     static_cast<std::streamsize>(row.size()));
        }
        if (!os) throw DataError("images.idx: write failed");
    }
    {
        std::ofstream os(dir / "labels.idx", std::ios::binary);
        if (!os) throw DataError("labels.idx: cannot open for writing");
        write_be32(os, kLabelMagic);
        write_be32(os, count);
        for (const Sample& s : ds.samples)
            os.put(static_cast<char>(static_cast<unsigned char>(s.label)));
        if (!os) throw DataError("labels.idx: write failed");
    }
    {
        std::ofstream os(dir / "manifest.csv", std::ios::binary);
        if (!os) throw DataError("manifest.csv: cannot open for writing");
        os << "index,writer_id,label,class_name\n";
        for (std::size_t i = 0; i < ds.samples.size(); ++i) {
            const Sample& s = ds.samples[i];
            const std::string& name =
                static_cast<std::size_t>(s.label) < ds.class_names.size()
                    ? ds.class_names[static_cast<std::size_t>(s.label)]
                    : std::string();
            os << i << ',' << s.writer_id << ',' << s.label << ',' << name << '\n';
        }
        if (!os) throw DataError("manifest.csv: write failed");
    }
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
    LabeledDataset ds;
    ds.class_names.assign(class_names().begin(), class_names().end());

    std::uint32_t count = 0;
    {
        std::ifstream is(dir / "images.idx", std::ios::binary);
        if (!is) throw DataError("images.idx: cannot open");
        if (read_be32(is, "images.idx") != kImageMagic)
            throw DataError("images.idx: bad magic");
        count = read_be32(is, "images.idx");
        const std::uint32_t rows = read_be32(is, "images.idx");
        const std::uint32_t cols = read_be32(is, "images.idx");
        if (rows != kSide || cols != kSide)
            throw DataError("images.idx: dimension mismatch, expected 28x28 got " +
                            std::to_string(rows) + "x" + std::to_string(cols));
        ds.samples.resize(count);
        std::vector<unsigned char> row(kImageDim);
        for (std::uint32_t i = 0; i < count; ++i) {
            if (!is.read(reinterpret_cast<char*>(row.data()),
                         static_cast<std::streamsize>(row.size())))
                throw DataError("images.idx: truncated file");
            Tensor img({kSide, kSide});
            for (std::size_t p = 0; p < kImageDim; ++p)
                img.data()[p] = static_cast<double>(row[p]) / 255.0;
            ds.samples[i].image = std::move(img);
        }
    }
    {
        std::ifstream is(dir / "labels.idx", std::ios::binary);
        if (!is) throw DataError("labels.idx: cannot open");
        if (read_be32(is, "labels.idx") != kLabelMagic)
            throw DataError("labels.idx: bad magic");
        const std::uint32_t n = read_be32(is, "labels.idx");
        if (n != count)
            throw DataError("labels.idx: dimension mismatch, " + std::to_string(n) +
                            " labels for " + std::to_string(count) + " images");
        for (std::uint32_t i = 0; i < n; ++i) {
            const int c = is.get();
            if (c == std::ifstream::traits_type::eof())
                throw DataError("labels.idx: truncated file");
            ds.samples[i].label = c;
        }
    }
    {
        std::ifstream is(dir / "manifest.csv", std::ios::binary);
        if (!is) throw DataError("manifest.csv: cannot open");
        std::string line;
        if (!std::getline(is, line)) throw DataError("manifest.csv: truncated file");
        std::uint32_t i = 0;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            if (i >= count)
                throw DataError("manifest.csv: dimension mismatch, more rows than images");
            const std::vector<std::string> f = split_csv(line);
            if (f.size() < 4) throw DataError("manifest.csv: malformed row " + std::to_string(i));
            ds.samples[i].writer_id = std::stoi(f[1]);
            if (std::stoi(f[2]) != ds.samples[i].label)
                throw DataError("manifest.csv: dimension mismatch, label disagrees at row " +
                                std::to_string(i));
            ++i;
        }
        if (i != count)
            throw DataError("manifest.csv: dimension mismatch, " + std::to_string(i) +
                            " rows for " + std::to_string(count) + " images");
    }
    return ds;
}

}  // namespace glyphlab
