#include "covqt/tessellate.hpp"

#include <algorithm>
#include <cmath>

#include "covqt/errors.hpp"

namespace covqt {

double polygon_area(const Polygon& poly) {
    const std::size_t n = poly.vertices.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& a = poly.vertices[i];
        const Vec& b = poly.vertices[(i + 1) % n];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    return std::abs(twice) / 2.0;
}

Polygon clip_halfplane(const Polygon& poly, const Vec& anchor, const Vec& outward_normal) {
    Polygon out;
    const std::size_t n = poly.vertices.size();
    if (n == 0) return out;
    out.vertices.reserve(n + 1);

    auto side = [&](const Vec& p) { return offset_dot(p, anchor, outward_normal); };

    for (std::size_t i = 0; i < n; ++i) {
        const Vec& cur = poly.vertices[i];
        const Vec& nxt = poly.vertices[(i + 1) % n];
        const double sc = side(cur);
        const double sn = side(nxt);
        if (sc <= 0.0) out.vertices.push_back(cur);
        if ((sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0)) {
            const double t = sc / (sc - sn);
            out.vertices.push_back(Vec{cur[0] + t * (nxt[0] - cur[0]),
                                       cur[1] + t * (nxt[1] - cur[1])});
        }
    }
    return out;
}

namespace {

void stroke_polygon(Image& img, const Polygon& poly, std::uint8_t shade) {
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& a = poly.vertices[i];
        const Vec& b = poly.vertices[(i + 1) % n];
        const double len = std::max(std::abs(b[0] - a[0]), std::abs(b[1] - a[1]));
        const int steps = std::max(1, static_cast<int>(std::ceil(len)));
        for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            const long x = std::lround(a[0] + t * (b[0] - a[0]) - 0.5);
            const long y = std::lround(a[1] + t * (b[1] - a[1]) - 0.5);
            if (x < 0 || y < 0 || x >= static_cast<long>(img.width) ||
                y >= static_cast<long>(img.height))
                continue;
            for (std::size_t c = 0; c < img.channels; ++c)
                img.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c, shade);
        }
    }
}

} // namespace

Tessellation tessellate(const Image& source, double tolerance, const DimRule& rule,
                        std::uint32_t max_level, bool outline) {
    if (source.width == 0 || source.height == 0) throw InvalidArgument("empty image");
    if (!(tolerance > 0.0 && tolerance < 1.0))
        throw InvalidArgument("tessellation tolerance must lie in (0, 1)");

    const std::size_t npix = source.width * source.height;
    std::vector<DataPoint> points;
    points.reserve(npix);
    std::vector<double> weights(npix);
    std::vector<double> values(npix);
    for (std::size_t y = 0; y < source.height; ++y)
        for (std::size_t x = 0; x < source.width; ++x) {
            const std::size_t i = y * source.width + x;
            points.push_back(DataPoint{static_cast<std::int64_t>(i),
                                       Vec{static_cast<double>(x) + 0.5,
                                           static_cast<double>(y) + 0.5}});
            weights[i] = source.intensity(x, y);
            values[i] = source.intensity(x, y);
        }

    TreeConfig config;
    config.dim_rule = rule;
    config.mode = BuildMode::Tessellation;
    config.tess_tolerance = tolerance;
    config.max_depth = max_level;

    Tessellation result{Tree::build(std::move(points), config, BuildAux{weights, values}),
                        {},
                        source.channels == 3 ? Image::rgb(source.width, source.height)
                                             : Image::gray(source.width, source.height)};
    const Tree& tree = result.tree;

    // Clip each node's polygon out of its parent's along the descent.
    const double w = static_cast<double>(source.width);
    const double h = static_cast<double>(source.height);
    result.polygons.assign(tree.node_count(), Polygon{});
    result.polygons[0].vertices = {Vec{0.0, 0.0}, Vec{w, 0.0}, Vec{w, h}, Vec{0.0, h}};
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const CovNode& node = tree.node(i);
        if (node.is_leaf()) continue;
        for (std::int32_t child : node.children) {
            if (child == kNoChild) continue;
            Polygon poly = result.polygons[i];
            for (const Vec& u : tree.node(child).corner_normals)
                poly = clip_halfplane(poly, node.expectation, u);
            result.polygons[child] = std::move(poly);
        }
    }

    // Fill each leaf's pixels with the partition mean color.
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const CovNode& node = tree.node(i);
        if (!node.is_leaf()) continue;
        const auto leaf_pixels = tree.leaf_points(node);

        double mean[3] = {0.0, 0.0, 0.0};
        for (std::uint32_t idx : leaf_pixels) {
            const std::size_t pix = static_cast<std::size_t>(tree.points()[idx].id);
            for (std::size_t c = 0; c < source.channels; ++c)
                mean[c] += source.pixels[pix * source.channels + c];
        }
        for (std::size_t c = 0; c < source.channels; ++c) {
            mean[c] /= static_cast<double>(leaf_pixels.size());
        }
        for (std::uint32_t idx : leaf_pixels) {
            const std::size_t pix = static_cast<std::size_t>(tree.points()[idx].id);
            for (std::size_t c = 0; c < source.channels; ++c)
                result.mosaic.pixels[pix * source.channels + c] =
                    static_cast<std::uint8_t>(std::lround(mean[c]));
        }
    }

    if (outline) {
        for (std::size_t i = 0; i < tree.node_count(); ++i)
            if (tree.node(i).is_leaf() && !result.polygons[i].empty())
                stroke_polygon(result.mosaic, result.polygons[i], 0);
    }
    return result;
}

} // namespace covqt
