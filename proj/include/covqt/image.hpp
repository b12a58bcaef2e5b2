#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace covqt {

/// 8-bit raster, 1 channel (grayscale) or 3 (RGB), row-major interleaved.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<std::uint8_t> pixels;

    static Image gray(std::size_t w, std::size_t h, std::uint8_t fill = 0);
    static Image rgb(std::size_t w, std::size_t h, std::uint8_t fill = 0);

    std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
        return pixels[(y * width + x) * channels + c];
    }
    void set(std::size_t x, std::size_t y, std::size_t c, std::uint8_t v) {
        pixels[(y * width + x) * channels + c] = v;
    }

    /// Grayscale weight: the single channel, or R+G+B for color input.
    double intensity(std::size_t x, std::size_t y) const {
        if (channels == 1) return at(x, y);
        return double(at(x, y, 0)) + double(at(x, y, 1)) + double(at(x, y, 2));
    }
};

/// Binary PGM (P5) / PPM (P6), 8-bit maxval only.
Image read_pnm(const std::string& path);
void write_pnm(const Image& image, const std::string& path);

} // namespace covqt
