#include "qdpc/pfm.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace qdpc {

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

bool host_is_little() { return std::endian::native == std::endian::little; }

// Next whitespace-delimited header token.
std::string token(std::istream& in) {
    std::string t;
    if (!(in >> t)) {
        throw IoError("pfm: truncated header");
    }
    return t;
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const RealImage& image) {
    if (image.empty()) {
        throw IoError("pfm: refusing to write an empty image to " + path.string());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("pfm: cannot open " + path.string() + " for writing");
    }
    out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";

    const int w = image.width();
    std::vector<std::uint32_t> row(static_cast<std::size_t>(w));
    for (int y = image.height() - 1; y >= 0; --y) {
        for (int x = 0; x < w; ++x) {
            const float f = static_cast<float>(image(x, y));
            std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
            row[static_cast<std::size_t>(x)] = host_is_little() ? bits : byteswap32(bits);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t)));
    }
    if (!out) {
        throw IoError("pfm: write failed for " + path.string());
    }
}

RealImage read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("pfm: cannot open " + path.string());
    }
    if (token(in) != "Pf") {
        throw IoError("pfm: " + path.string() + " is not a grayscale PFM (expected 'Pf')");
    }
    int w = 0;
    int h = 0;
    double scale = 0.0;
    try {
        w = std::stoi(token(in));
        h = std::stoi(token(in));
        scale = std::stod(token(in));
    } catch (const std::logic_error&) {
        throw IoError("pfm: bad header in " + path.string());
    }
    if (w <= 0 || h <= 0 || scale == 0.0 || !std::isfinite(scale)) {
        throw IoError("pfm: bad header in " + path.string());
    }
    // Exactly one whitespace byte separates the header from the raster.
    in.get();
    const bool file_little = scale < 0.0;
    const bool swap = file_little != host_is_little();

    RealImage image(w, h);
    std::vector<std::uint32_t> row(static_cast<std::size_t>(w));
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t)));
        if (in.gcount() != static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t))) {
            throw IoError("pfm: truncated raster in " + path.string());
        }
        for (int x = 0; x < w; ++x) {
            std::uint32_t bits = row[static_cast<std::size_t>(x)];
            if (swap) {
                bits = byteswap32(bits);
            }
            image(x, y) = static_cast<double>(std::bit_cast<float>(bits));
        }
    }
    return image;
}

}  // namespace qdpc
