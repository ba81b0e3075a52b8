#include "glyphlab/pnm.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include "glyphlab/error.hpp"

namespace glyphlab {

namespace {

// Reads one whitespace/comment-separated token from a PNM header.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw DataError("pnm: truncated header");
    return tok;
}

struct PnmHeader {
    std::string magic;
    std::size_t width, height;
    int maxval;
};

// The whole token must be a number; "garbage" or "12abc" is a corrupt file,
// not a usage error.
std::size_t header_number(std::istream& in, const std::filesystem::path& path) {
    const std::string tok = next_token(in);
    std::size_t value = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw DataError("pnm: malformed header token '" + tok + "' in " + path.string());
    return value;
}

PnmHeader read_header(std::istream& in, const std::filesystem::path& path) {
    PnmHeader h;
    h.magic = next_token(in);
    if (h.magic != "P5" && h.magic != "P6")
        throw DataError("pnm: unsupported magic '" + h.magic + "' in " + path.string());
    h.width = header_number(in, path);
    h.height = header_number(in, path);
    h.maxval = static_cast<int>(header_number(in, path));
    if (h.maxval != 255) throw DataError("pnm: only maxval 255 supported in " + path.string());
    if (h.width == 0 || h.height == 0) throw DataError("pnm: empty image in " + path.string());
    return h;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("pnm: cannot open " + path.string());
    return in;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    const auto h = read_header(in, path);
    if (h.magic != "P5") throw DataError("pnm: expected P5 in " + path.string());
    GrayImage img(h.width, h.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw DataError("pnm: truncated pixel data in " + path.string());
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("pnm: cannot write " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

RgbImage read_ppm(const std::filesystem::path& path) {
    auto in = open_in(path);
    const auto h = read_header(in, path);
    if (h.magic != "P6") throw DataError("pnm: expected P6 in " + path.string());
    RgbImage img(h.width, h.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw DataError("pnm: truncated pixel data in " + path.string());
    return img;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("pnm: cannot write " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
}

GrayImage read_scan(const std::filesystem::path& path) {
    {
        auto in = open_in(path);
        char m[2] = {0, 0};
        in.read(m, 2);
        if (m[0] == 'P' && m[1] == '6') return to_grayscale(read_ppm(path));
    }
    return read_pgm(path);
}

GrayImage to_gray(const BinaryImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = img.pixels[i] ? 0 : 255;
    return out;
}

}  // namespace glyphlab
