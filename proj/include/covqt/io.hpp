#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "covqt/image.hpp"
#include "covqt/tree.hpp"

namespace covqt {

/// Reads a point CSV: one point per line, d comma-separated reals. A header
/// line is detected by its non-numeric fields; a leading "id" column supplies
/// stable identifiers, otherwise points are numbered 0..n-1 in file order.
/// Parse failures carry file and line context.
std::vector<DataPoint> read_point_csv(const std::string& path);

/// Writes "id,x0,..,x{d-1}" with round-trip-exact floating point fields.
void write_point_csv(const std::string& path, std::span<const DataPoint> points);

/// Draws n points i.i.d. with per-pixel probability proportional to intensity,
/// jittered uniformly inside the pixel: pixel (col, row) maps to coordinates
/// (col + u, row + v), u, v in [0, 1). Deterministic per seed.
std::vector<DataPoint> sample_image(const Image& image, std::size_t n, std::uint64_t seed);

} // namespace covqt
