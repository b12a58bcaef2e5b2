#include "covqt/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "covqt/errors.hpp"
#include "covqt/rng.hpp"

namespace covqt {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<DataPoint> read_point_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<DataPoint> points;
    std::string line;
    std::size_t lineno = 0;
    bool id_column = false;
    bool saw_header = false;
    std::size_t arity = 0; // fields per data line, fixed by the first one

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv(line);

        if (points.empty() && !saw_header) {
            // Header detection: any non-numeric field makes this a header line.
            bool numeric = true;
            double tmp;
            for (const std::string& f : fields)
                if (!parse_double(trim(f), tmp)) numeric = false;
            if (!numeric) {
                saw_header = true;
                id_column = !fields.empty() && trim(fields.front()) == "id";
                arity = fields.size();
                continue;
            }
        }

        if (arity == 0) arity = fields.size();
        if (fields.size() != arity)
            throw ParseError(path, lineno,
                             "expected " + std::to_string(arity) + " fields, got " +
                                 std::to_string(fields.size()));

        DataPoint p;
        std::size_t first = 0;
        if (id_column) {
            const std::string f = trim(fields[0]);
            char* end = nullptr;
            p.id = std::strtoll(f.c_str(), &end, 10);
            if (end == f.c_str() || *end != '\0')
                throw ParseError(path, lineno, "malformed id '" + f + "'");
            first = 1;
        } else {
            p.id = static_cast<std::int64_t>(points.size());
        }

        p.coords = Vec(fields.size() - first);
        for (std::size_t i = first; i < fields.size(); ++i) {
            double v;
            if (!parse_double(trim(fields[i]), v))
                throw ParseError(path, lineno, "malformed number '" + trim(fields[i]) + "'");
            if (!std::isfinite(v)) throw ParseError(path, lineno, "non-finite coordinate");
            p.coords[i - first] = v;
        }
        points.push_back(std::move(p));
    }
    if (points.empty()) throw ParseError(path, lineno, "no points found");
    return points;
}

void write_point_csv(const std::string& path, std::span<const DataPoint> points) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::size_t d = points.empty() ? 0 : points.front().coords.dim();
    out << "id";
    for (std::size_t k = 0; k < d; ++k) out << ",x" << k;
    out << "\n";
    char buf[40];
    for (const DataPoint& p : points) {
        out << p.id;
        for (std::size_t k = 0; k < d; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", p.coords[k]);
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("failed to write " + path);
}

std::vector<DataPoint> sample_image(const Image& image, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample count must be at least 1");
    const std::size_t npix = image.width * image.height;
    if (npix == 0) throw InvalidArgument("empty image");

    std::vector<double> cdf(npix);
    double total = 0.0;
    for (std::size_t y = 0; y < image.height; ++y)
        for (std::size_t x = 0; x < image.width; ++x) {
            total += image.intensity(x, y);
            cdf[y * image.width + x] = total;
        }
    if (!(total > 0.0)) throw ZeroMeasure();

    Rng rng(seed);
    std::vector<DataPoint> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * total;
        const std::size_t pix =
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        const std::size_t idx = std::min(pix, npix - 1);
        const double col = static_cast<double>(idx % image.width);
        const double row = static_cast<double>(idx / image.width);
        points.push_back(
            DataPoint{static_cast<std::int64_t>(i), Vec{col + rng.uniform(), row + rng.uniform()}});
    }
    return points;
}

} // namespace covqt
