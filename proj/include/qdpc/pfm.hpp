#pragma once

#include <filesystem>

#include "qdpc/array2d.hpp"

namespace qdpc {

/// Grayscale "Pf" map, float32 samples, negative scale (little-endian).
/// Rows are stored bottom to top as the format requires; in memory row 0 is the top.
void write_pfm(const std::filesystem::path& path, const RealImage& image);

/// Accepts either byte order. Throws IoError on malformed input.
[[nodiscard]] RealImage read_pfm(const std::filesystem::path& path);

}  // namespace qdpc
