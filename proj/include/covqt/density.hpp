#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covqt/knn.hpp"
#include "covqt/tree.hpp"

namespace covqt {

/// Raster over which a density field is evaluated; extent in data units.
struct GridSpec {
    std::size_t width = 0;
    std::size_t height = 0;
    double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;

    double cell_w() const { return (xmax - xmin) / static_cast<double>(width); }
    double cell_h() const { return (ymax - ymin) / static_cast<double>(height); }
};

struct DensityField {
    GridSpec grid;
    std::vector<double> cells; // row-major, cells[row * width + col]
    double integral = 0.0;     // cell sum times cell area

    double at(std::size_t col, std::size_t row) const { return cells[row * grid.width + col]; }
};

/// Cubic B-spline profile normalised so that the two-dimensional elliptical
/// estimate integrates to one after the 1/(sigma_a sigma_b) scaling:
/// 2*pi * integral_0^2 w(q) q dq = 1. Support cuts off at xi = 2.
double cubic_bspline(double xi);

/// Smoothing kernel in metric units.
struct KernelModel {
    enum class Profile { CubicBSpline };
    Profile profile = Profile::CubicBSpline;
    double support_radius = 2.0; // value is zero at and beyond this xi

    double value(double xi) const { return cubic_bspline(xi); }
};

/// Anisotropic kernel density estimate at one query point (2D data): the
/// neighborhood ellipse comes from the converged bootstrap metric, rescaled so
/// the outermost of the K neighbors sits on the support boundary xi = 2.
double density_estimate(const Tree& tree, const Vec& query, std::size_t k, std::size_t n_total,
                        double aknn_tolerance = 1e-19);

/// Evaluates density_estimate at every cell center; rows render in parallel.
DensityField render_field(const Tree& tree, const GridSpec& grid, std::size_t k,
                          std::size_t n_total, double aknn_tolerance = 1e-19);

/// 8-bit grayscale dump: linear map of [0, max cell] onto [0, 255].
void write_density_pgm(const DensityField& field, const std::string& path);

/// "x,y,rho" rows, one per cell, with round-trip-exact floats.
void write_density_csv(const DensityField& field, const std::string& path);

} // namespace covqt
