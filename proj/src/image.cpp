#include "covqt/image.hpp"

#include <cctype>
#include <fstream>

#include "covqt/errors.hpp"

namespace covqt {

Image Image::gray(std::size_t w, std::size_t h, std::uint8_t fill) {
    return Image{w, h, 1, std::vector<std::uint8_t>(w * h, fill)};
}

Image Image::rgb(std::size_t w, std::size_t h, std::uint8_t fill) {
    return Image{w, h, 3, std::vector<std::uint8_t>(w * h * 3, fill)};
}

namespace {

// Reads the next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c = in.get();
    while (in) {
        if (c == '#') {
            while (in && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (in && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (tok.empty()) throw IoError(path + ": truncated PNM header");
    return tok;
}

std::size_t parse_size(const std::string& tok, const std::string& path) {
    try {
        const long long v = std::stoll(tok);
        if (v <= 0) throw IoError(path + ": non-positive PNM header field");
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        throw IoError(path + ": malformed PNM header field '" + tok + "'");
    }
}

} // namespace

Image read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    const std::string magic = next_token(in, path);
    std::size_t channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw IoError(path + ": unsupported PNM magic '" + magic + "' (binary P5/P6 only)");

    Image img;
    img.channels = channels;
    img.width = parse_size(next_token(in, path), path);
    img.height = parse_size(next_token(in, path), path);
    const std::size_t maxval = parse_size(next_token(in, path), path);
    if (maxval != 255) throw IoError(path + ": only 8-bit PNM supported (maxval 255)");

    img.pixels.resize(img.width * img.height * channels);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw IoError(path + ": truncated pixel data");
    return img;
}

void write_pnm(const Image& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << (image.channels == 3 ? "P6" : "P5") << "\n"
        << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("failed to write " + path);
}

} // namespace covqt
