#include "covqt/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "covqt/errors.hpp"
#include "covqt/image.hpp"
#include "covqt/parallel.hpp"

namespace covqt {

namespace {

// 2D normalisation: 2*pi * int_0^2 w(q) q dq = 0.7*pi with unit prefactor.
constexpr double kSigma2d = 10.0 / (7.0 * std::numbers::pi);

// Collinear-neighborhood floor: sigma_b >= 1e-3 * sigma_a.
constexpr double kMinAxisRatio = 1e-3;

} // namespace

double cubic_bspline(double xi) {
    if (xi < 0.0) throw InvalidArgument("kernel argument must be non-negative");
    if (xi >= 2.0) return 0.0;
    if (xi < 1.0) return kSigma2d * (1.0 - 1.5 * xi * xi + 0.75 * xi * xi * xi);
    const double t = 2.0 - xi;
    return kSigma2d * 0.25 * t * t * t;
}

double density_estimate(const Tree& tree, const Vec& query, std::size_t k, std::size_t n_total,
                        double aknn_tolerance) {
    if (tree.dim() != 2)
        throw InvalidArgument("density estimation is defined for 2D data");
    if (k < 3) throw InvalidK("density estimation needs K >= 3");
    if (n_total < 1) throw InvalidArgument("n_total must be positive");

    const AknnResult res = anisotropic_knn(tree, query, k, aknn_tolerance);

    double sigma_a_sq = res.metric.metric.eigenvalues[0];
    double sigma_b_sq = res.metric.metric.eigenvalues[1];
    Vec u_a = res.metric.metric.eigenvectors[0];
    Vec u_b = res.metric.metric.eigenvectors[1];
    if (!(sigma_a_sq > 0.0)) {
        // Point-mass neighborhood (duplicate data): fall back to circular axes.
        sigma_a_sq = sigma_b_sq = 1.0;
        u_a = Vec{1.0, 0.0};
        u_b = Vec{0.0, 1.0};
    }
    sigma_b_sq = std::max(sigma_b_sq, kMinAxisRatio * kMinAxisRatio * sigma_a_sq);
    const double sigma_a = std::sqrt(sigma_a_sq);
    const double sigma_b = std::sqrt(sigma_b_sq);

    // Metric distances of the K neighbors; the outermost defines the support.
    const std::vector<KnnEntry>& entries = res.list.entries();
    std::vector<double> xi(entries.size());
    double xi_max = 0.0;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        const Vec& p = tree.points()[tree.index_of_id(entries[j].id)].coords;
        const double pa = offset_dot(query, p, u_a);
        const double pb = offset_dot(query, p, u_b);
        xi[j] = std::sqrt(pa * pa / sigma_a_sq + pb * pb / sigma_b_sq);
        xi_max = std::max(xi_max, xi[j]);
    }
    xi_max = std::max(xi_max, 1e-12); // all neighbors exactly at the query

    // Rescale so the k-th neighbor lies on the kernel support boundary.
    const KernelModel kernel;
    const double s = xi_max / kernel.support_radius;
    const double ellipse = (sigma_a * s) * (sigma_b * s);

    double sum = 0.0;
    for (double x : xi) sum += kernel.value(x / s);
    return sum / (ellipse * static_cast<double>(n_total));
}

DensityField render_field(const Tree& tree, const GridSpec& grid, std::size_t k,
                          std::size_t n_total, double aknn_tolerance) {
    if (grid.width < 8 || grid.height < 8)
        throw InvalidArgument("density grid must be at least 8x8");
    if (!(grid.xmax > grid.xmin && grid.ymax > grid.ymin))
        throw InvalidArgument("density grid extent is empty");

    DensityField field;
    field.grid = grid;
    field.cells.assign(grid.width * grid.height, 0.0);

    parallel_for(grid.height, [&](std::size_t row_begin, std::size_t row_end) {
        for (std::size_t row = row_begin; row < row_end; ++row) {
            const double y = grid.ymin + (static_cast<double>(row) + 0.5) * grid.cell_h();
            for (std::size_t col = 0; col < grid.width; ++col) {
                const double x = grid.xmin + (static_cast<double>(col) + 0.5) * grid.cell_w();
                field.cells[row * grid.width + col] =
                    density_estimate(tree, Vec{x, y}, k, n_total, aknn_tolerance);
            }
        }
    });

    double sum = 0.0;
    for (double c : field.cells) sum += c;
    field.integral = sum * grid.cell_w() * grid.cell_h();
    return field;
}

void write_density_pgm(const DensityField& field, const std::string& path) {
    double peak = 0.0;
    for (double c : field.cells) peak = std::max(peak, c);

    Image img = Image::gray(field.grid.width, field.grid.height);
    if (peak > 0.0) {
        for (std::size_t i = 0; i < field.cells.size(); ++i)
            img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * field.cells[i] / peak));
    }
    write_pnm(img, path);
}

void write_density_csv(const DensityField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "x,y,rho\n";
    char buf[128];
    for (std::size_t row = 0; row < field.grid.height; ++row) {
        const double y = field.grid.ymin + (static_cast<double>(row) + 0.5) * field.grid.cell_h();
        for (std::size_t col = 0; col < field.grid.width; ++col) {
            const double x = field.grid.xmin + (static_cast<double>(col) + 0.5) * field.grid.cell_w();
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x, y, field.at(col, row));
            out << buf;
        }
    }
    if (!out) throw IoError("failed to write " + path);
}

} // namespace covqt
