#pragma once

#include <cstdint>
#include <vector>

#include "covqt/image.hpp"
#include "covqt/rng.hpp"
#include "covqt/tree.hpp"

namespace testsupport {

std::vector<covqt::DataPoint> uniform_points(std::size_t n, std::size_t d, std::uint64_t seed,
                                             double lo = 0.0, double hi = 1.0);

/// Isotropic Gaussian blob around `center`.
std::vector<covqt::DataPoint> gaussian_cluster(std::size_t n, const covqt::Vec& center,
                                               double sigma, std::uint64_t seed);

/// Correlated zero-mean Gaussian: x = L z with z standard normal and L a
/// d x d lower-triangular factor (row-major), so cov(x) = L L^T.
std::vector<covqt::DataPoint> correlated_gaussian(std::size_t n, std::size_t d,
                                                  const std::vector<double>& factor,
                                                  std::uint64_t seed);

/// Two-armed logarithmic spiral over a bright core and a faint uniform
/// background; the stand-in for the noisy galaxy photograph driving the
/// sampling demos. Deterministic (no RNG involved).
covqt::Image spiral_galaxy_image(std::size_t width = 200, std::size_t height = 150);

/// Positions on an arm centerline (strongly anisotropic neighborhoods).
std::vector<covqt::Vec> spiral_arm_queries(std::size_t width = 200, std::size_t height = 150);

/// Positions in the inter-arm gaps (near-isotropic background neighborhoods).
std::vector<covqt::Vec> background_queries(std::size_t width = 200, std::size_t height = 150);

} // namespace testsupport
