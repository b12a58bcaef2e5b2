#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "covqt/errors.hpp"
#include "covqt/vec.hpp"

namespace covqt {

/// Dense symmetric d x d matrix, row-major.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(std::size_t d) : d_(d), a_(d * d, 0.0) {}

    std::size_t dim() const { return d_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * d_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * d_ + j]; }

private:
    std::size_t d_ = 0;
    std::vector<double> a_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues sorted non-increasing.
/// Each eigenvector is unit length and carries the deterministic sign
/// convention: its largest-magnitude component is non-negative.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    std::vector<Vec> eigenvectors; // eigenvectors[j] pairs with eigenvalues[j]

    std::size_t dim() const { return eigenvalues.size(); }
};

/// Metric whose eigenvalues are all one and whose axes are the standard basis.
EigenDecomposition identity_metric(std::size_t d);

/// Rule deciding how many principal components a partition keeps.
struct DimRule {
    enum class Kind { Spacing, Ratio };
    Kind kind = Kind::Spacing;
    double ratio = 0.5; // threshold t for Kind::Ratio

    static DimRule spacing() { return {Kind::Spacing, 0.0}; }
    static DimRule ratio_threshold(double t) { return {Kind::Ratio, t}; }
};

struct MeanCov {
    Vec mean;
    SymMat cov;
};

/// Core estimator over any indexable point source. `at(i)` must return (a
/// reference to) the i-th Vec; `weight` may be null for uniform weights.
/// Population normalisation: a single point yields a zero covariance.
template <class At>
MeanCov mean_and_covariance_fn(std::size_t n, At&& at, const double* weight = nullptr) {
    if (n == 0) throw EmptyPartition();
    const std::size_t d = at(0).dim();
    if (d < 1 || d > kMaxDim)
        throw DimensionMismatch("dimensionality " + std::to_string(d) + " outside [1, " +
                                std::to_string(kMaxDim) + "]");

    double total = 0.0;
    if (weight) {
        for (std::size_t i = 0; i < n; ++i) total += weight[i];
        if (!(total > 0.0)) weight = nullptr;
    }
    if (!weight) total = static_cast<double>(n);

    MeanCov out;
    out.mean = Vec(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = at(i);
        if (p.dim() != d)
            throw DimensionMismatch("expected " + std::to_string(d) + " components, got " +
                                    std::to_string(p.dim()));
        const double w = weight ? weight[i] : 1.0;
        for (std::size_t k = 0; k < d; ++k) out.mean[k] += w * p[k];
    }
    for (std::size_t k = 0; k < d; ++k) out.mean[k] /= total;

    out.cov = SymMat(d);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& p = at(i);
        const double w = weight ? weight[i] : 1.0;
        for (std::size_t r = 0; r < d; ++r) {
            const double dr = p[r] - out.mean[r];
            for (std::size_t c = r; c < d; ++c) out.cov(r, c) += w * dr * (p[c] - out.mean[c]);
        }
    }
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = r; c < d; ++c) {
            out.cov(r, c) /= total;
            out.cov(c, r) = out.cov(r, c);
        }
    return out;
}

/// Sample mean and population covariance (1/n) of a non-empty point set.
MeanCov mean_and_covariance(std::span<const Vec> points);

/// Weighted variant: mean = sum(w x)/sum(w), cov = sum(w (x-mu)(x-mu)^T)/sum(w).
/// Falls back to uniform weights when the total weight is not positive.
MeanCov mean_and_covariance(std::span<const Vec> points, std::span<const double> weights);

/// Cyclic Jacobi eigendecomposition for small symmetric matrices (d <= kMaxDim).
/// Eigenvalues within -1e-12 * max|eigenvalue| of zero are clamped to zero so
/// covariance inputs come out positive semidefinite.
EigenDecomposition eigendecompose(const SymMat& m);

/// Number of leading principal components kept for a partition of n points.
/// Always 0 <= lambda <= min(d, n-1).
int select_intrinsic_dim(const EigenDecomposition& eig, std::uint64_t n, const DimRule& rule);

/// Relative floor below which metric eigenvalues are dropped from the
/// Mahalanobis sum instead of inverted.
inline constexpr double kMetricEigenFloor = 1e-12;

/// Squared Mahalanobis form sum_j (delta . u_j)^2 / sigma_j^2 over the usable
/// eigenpairs of the metric. Throws SingularMetric when no eigenvalue survives
/// the floor.
double mahalanobis_sq(const Vec& delta, const EigenDecomposition& metric);

/// Same form evaluated as delta = q - origin without a temporary.
double mahalanobis_sq(const Vec& q, const Vec& origin, const EigenDecomposition& metric);

} // namespace covqt
