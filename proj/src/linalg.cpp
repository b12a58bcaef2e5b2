#include "covqt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace covqt {

EigenDecomposition identity_metric(std::size_t d) {
    EigenDecomposition e;
    e.eigenvalues.assign(d, 1.0);
    e.eigenvectors.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
        Vec v(d, 0.0);
        v[j] = 1.0;
        e.eigenvectors.push_back(std::move(v));
    }
    return e;
}

MeanCov mean_and_covariance(std::span<const Vec> points) {
    return mean_and_covariance_fn(points.size(),
                                  [&](std::size_t i) -> const Vec& { return points[i]; });
}

MeanCov mean_and_covariance(std::span<const Vec> points, std::span<const double> weights) {
    if (weights.size() != points.size())
        throw DimensionMismatch("weight count " + std::to_string(weights.size()) +
                                " does not match point count " + std::to_string(points.size()));
    return mean_and_covariance_fn(
        points.size(), [&](std::size_t i) -> const Vec& { return points[i]; }, weights.data());
}

EigenDecomposition eigendecompose(const SymMat& m) {
    const std::size_t d = m.dim();
    if (d < 1 || d > kMaxDim)
        throw DimensionMismatch("matrix dimension " + std::to_string(d) + " outside [1, " +
                                std::to_string(kMaxDim) + "]");

    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) scale = std::max(scale, std::abs(m(i, j)));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(scale, 1e-300)) throw NotSymmetric();

    // Work on copies: a becomes diagonal, v accumulates the rotations.
    std::vector<double> a(d * d);
    std::vector<double> v(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        v[i * d + i] = 1.0;
        for (std::size_t j = 0; j < d; ++j) a[i * d + j] = m(i, j);
    }

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (off <= 1e-30 * std::max(scale * scale, 1e-300)) break;

        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (apq == 0.0) continue;
                const double app = a[p * d + p];
                const double aqq = a[q * d + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                a[p * d + p] = app - t * apq;
                a[q * d + q] = aqq + t * apq;
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a[k * d + p];
                    const double akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[p * d + k] = a[k * d + p];
                    a[k * d + q] = s * akp + c * akq;
                    a[q * d + k] = a[k * d + q];
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v[k * d + p];
                    const double vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a[i * d + i] > a[j * d + j]; });

    EigenDecomposition out;
    out.eigenvalues.resize(d);
    out.eigenvectors.resize(d);
    double max_abs = 0.0;
    for (std::size_t j = 0; j < d; ++j) max_abs = std::max(max_abs, std::abs(a[j * d + j]));
    for (std::size_t j = 0; j < d; ++j) {
        double lambda = a[order[j] * d + order[j]];
        if (lambda < 0.0 && lambda >= -1e-12 * max_abs) lambda = 0.0;
        out.eigenvalues[j] = lambda;

        Vec col(d);
        for (std::size_t k = 0; k < d; ++k) col[k] = v[k * d + order[j]];
        // Sign convention: first largest-magnitude component non-negative.
        std::size_t imax = 0;
        for (std::size_t k = 1; k < d; ++k)
            if (std::abs(col[k]) > std::abs(col[imax])) imax = k;
        if (col[imax] < 0.0) col = negated(col);
        out.eigenvectors[j] = std::move(col);
    }
    return out;
}

int select_intrinsic_dim(const EigenDecomposition& eig, std::uint64_t n, const DimRule& rule) {
    const std::size_t d = eig.dim();
    if (n < 1) throw InvalidArgument("partition size must be at least 1");
    const std::uint64_t cap = std::min<std::uint64_t>(d, n - 1);

    int lambda = 0;
    double edge_product = 1.0; // product of sqrt(alpha_i) over accepted components
    for (std::size_t j = 0; j < cap; ++j) {
        const double alpha = eig.eigenvalues[j];
        if (!(alpha > 0.0)) break;
        const double len = std::sqrt(alpha);

        bool accept = false;
        if (rule.kind == DimRule::Kind::Ratio) {
            accept = alpha / eig.eigenvalues[0] > rule.ratio * rule.ratio;
        } else if (j == 0) {
            accept = true;
        } else {
            // Mean spacing of n points inside the hyper-rectangle spanned by the
            // previously accepted component lengths: (volume / n)^(1/j).
            const double spacing =
                std::pow(edge_product / static_cast<double>(n), 1.0 / static_cast<double>(j));
            accept = len > spacing;
        }
        if (!accept) break;
        ++lambda;
        edge_product *= len;
    }
    return lambda;
}

namespace {

double metric_floor(const EigenDecomposition& metric) {
    const double lead = metric.eigenvalues.empty() ? 0.0 : metric.eigenvalues.front();
    if (!(lead > 0.0)) throw SingularMetric();
    return kMetricEigenFloor * lead;
}

} // namespace

double mahalanobis_sq(const Vec& q, const Vec& origin, const EigenDecomposition& metric) {
    const double floor = metric_floor(metric);
    double sum = 0.0;
    for (std::size_t j = 0; j < metric.dim(); ++j) {
        const double sigma_sq = metric.eigenvalues[j];
        if (sigma_sq < floor) break; // sorted descending: the rest are dropped too
        const double proj = offset_dot(q, origin, metric.eigenvectors[j]);
        sum += proj * proj / sigma_sq;
    }
    return sum;
}

double mahalanobis_sq(const Vec& delta, const EigenDecomposition& metric) {
    const double floor = metric_floor(metric);
    double sum = 0.0;
    for (std::size_t j = 0; j < metric.dim(); ++j) {
        const double sigma_sq = metric.eigenvalues[j];
        if (sigma_sq < floor) break;
        const double proj = dot(delta, metric.eigenvectors[j]);
        sum += proj * proj / sigma_sq;
    }
    return sum;
}

} // namespace covqt
