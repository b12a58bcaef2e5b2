#pragma once

#include <cstdint>
#include <vector>

#include "covqt/image.hpp"
#include "covqt/tree.hpp"

namespace covqt {

/// Convex polygon, vertices in order (2D).
struct Polygon {
    std::vector<Vec> vertices;
    bool empty() const { return vertices.size() < 3; }
};

double polygon_area(const Polygon& poly);

/// Keeps the half-plane (p - anchor) . outward_normal <= 0; clipped edges gain
/// the innermost intersection with the boundary line.
Polygon clip_halfplane(const Polygon& poly, const Vec& anchor, const Vec& outward_normal);

struct Tessellation {
    Tree tree;                     // Tessellation-mode tree over pixel centers
    std::vector<Polygon> polygons; // one per tree node, clipped along the descent
    Image mosaic;                  // leaves filled with their partition mean color
};

/// Covariance tessellation of an image: pixel centers weighted by intensity
/// drive the PCA, the grayscale dispersion drives the stop rule, and each leaf
/// is filled with its mean color. `outline` additionally strokes the clipped
/// partition boundaries.
Tessellation tessellate(const Image& source, double tolerance, const DimRule& rule,
                        std::uint32_t max_level, bool outline = false);

} // namespace covqt
