#include <doctest.h>

#include <cmath>

#include "covqt/linalg.hpp"
#include "covqt/rng.hpp"
#include "support/synthetic.hpp"

using namespace covqt;

namespace {

SymMat random_psd(std::size_t d, Rng& rng) {
    // B^T B is symmetric positive semidefinite by construction.
    std::vector<double> b(d * d);
    for (double& v : b) v = rng.uniform(-1.0, 1.0);
    SymMat m(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += b[k * d + i] * b[k * d + j];
            m(i, j) = s;
        }
    return m;
}

double frobenius(const SymMat& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

double reconstruction_residual(const SymMat& m, const EigenDecomposition& eig) {
    const std::size_t d = m.dim();
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double rebuilt = 0.0;
            for (std::size_t k = 0; k < d; ++k)
                rebuilt += eig.eigenvalues[k] * eig.eigenvectors[k][i] * eig.eigenvectors[k][j];
            const double diff = rebuilt - m(i, j);
            s += diff * diff;
        }
    return std::sqrt(s);
}

} // namespace

TEST_CASE("mean_and_covariance basics") {
    SUBCASE("single point has no dispersion") {
        const std::vector<Vec> pts = {Vec{1.0, 1.0}};
        const MeanCov mc = mean_and_covariance(pts);
        CHECK(mc.mean == Vec{1.0, 1.0});
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK(mc.cov(i, j) == 0.0);
    }
    SUBCASE("symmetric two-point case") {
        const std::vector<Vec> pts = {Vec{0.0, 0.0}, Vec{2.0, 0.0}};
        const MeanCov mc = mean_and_covariance(pts);
        CHECK(mc.mean == Vec{1.0, 0.0});
        CHECK(mc.cov(0, 0) == 1.0);
        CHECK(mc.cov(0, 1) == 0.0);
        CHECK(mc.cov(1, 1) == 0.0);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(mean_and_covariance(std::vector<Vec>{}), EmptyPartition);
    }
    SUBCASE("mixed dimensions") {
        const std::vector<Vec> pts = {Vec{0.0, 0.0}, Vec{1.0, 2.0, 3.0}};
        CHECK_THROWS_AS(mean_and_covariance(pts), DimensionMismatch);
    }
}

TEST_CASE("mean_and_covariance matches an independent accumulation on 3D Gaussian samples") {
    // cov = L L^T for this factor: [[1,0,0],[.5,1,0],[.2,-.3,.5]]
    const std::vector<double> L = {1.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.2, -0.3, 0.5};
    const auto data = testsupport::correlated_gaussian(1000, 3, L, 42);
    std::vector<Vec> pts;
    for (const auto& p : data) pts.push_back(p.coords);

    const MeanCov mc = mean_and_covariance(pts);

    // Textbook oracle: accumulate sums and cross products directly.
    double sum[3] = {0, 0, 0};
    for (const Vec& p : pts)
        for (int j = 0; j < 3; ++j) sum[j] += p[j];
    double mu[3];
    for (int j = 0; j < 3; ++j) mu[j] = sum[j] / 1000.0;
    double cov[3][3] = {};
    for (const Vec& p : pts)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) cov[r][c] += (p[r] - mu[r]) * (p[c] - mu[c]);

    for (int r = 0; r < 3; ++r) {
        CHECK(mc.mean[r] == doctest::Approx(mu[r]).epsilon(1e-12));
        for (int c = 0; c < 3; ++c)
            CHECK(mc.cov(r, c) == doctest::Approx(cov[r][c] / 1000.0).epsilon(1e-10));
    }

    // And the estimate sits within sampling error of the generator covariance.
    double truth[3][3] = {};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 3; ++k) truth[r][c] += L[r * 3 + k] * L[c * 3 + k];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(std::abs(mc.cov(r, c) - truth[r][c]) < 0.2);
}

TEST_CASE("weighted mean_and_covariance") {
    const std::vector<Vec> pts = {Vec{0.0, 0.0}, Vec{2.0, 0.0}};
    SUBCASE("uniform weights match the unweighted estimator") {
        const std::vector<double> w = {3.0, 3.0};
        const MeanCov a = mean_and_covariance(pts, w);
        const MeanCov b = mean_and_covariance(pts);
        CHECK(a.mean == b.mean);
        CHECK(a.cov(0, 0) == b.cov(0, 0));
    }
    SUBCASE("concentrated weight collapses to that point") {
        const std::vector<double> w = {1.0, 0.0};
        const MeanCov a = mean_and_covariance(pts, w);
        CHECK(a.mean == Vec{0.0, 0.0});
        CHECK(a.cov(0, 0) == 0.0);
    }
    SUBCASE("all-zero weights fall back to uniform") {
        const std::vector<double> w = {0.0, 0.0};
        const MeanCov a = mean_and_covariance(pts, w);
        CHECK(a.mean == Vec{1.0, 0.0});
    }
}

TEST_CASE("eigendecompose basics") {
    SUBCASE("identity") {
        SymMat m(2);
        m(0, 0) = m(1, 1) = 1.0;
        const EigenDecomposition eig = eigendecompose(m);
        CHECK(eig.eigenvalues[0] == doctest::Approx(1.0));
        CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
        CHECK(std::abs(dot(eig.eigenvectors[0], eig.eigenvectors[1])) < 1e-10);
    }
    SUBCASE("diagonal") {
        SymMat m(2);
        m(0, 0) = 4.0;
        m(1, 1) = 1.0;
        const EigenDecomposition eig = eigendecompose(m);
        CHECK(eig.eigenvalues[0] == 4.0);
        CHECK(eig.eigenvalues[1] == 1.0);
        CHECK(eig.eigenvectors[0] == Vec{1.0, 0.0});
        CHECK(eig.eigenvectors[1] == Vec{0.0, 1.0});
    }
    SUBCASE("non-symmetric input is rejected") {
        SymMat m(2);
        m(0, 1) = 1.0; // m(1,0) stays 0
        CHECK_THROWS_AS(eigendecompose(m), NotSymmetric);
    }
    SUBCASE("rounding-level negative eigenvalues clamp to zero") {
        SymMat m(2);
        m(0, 0) = 1.0;
        m(1, 1) = -1e-16;
        const EigenDecomposition eig = eigendecompose(m);
        CHECK(eig.eigenvalues[1] == 0.0);
    }
}

TEST_CASE("eigendecompose invariants on random PSD matrices up to kMaxDim") {
    Rng rng(7);
    for (std::size_t d : {2u, 3u, 5u, 9u, 16u}) {
        for (int rep = 0; rep < 8; ++rep) {
            const SymMat m = random_psd(d, rng);
            const EigenDecomposition eig = eigendecompose(m);

            // residual oracle computed here, independent of the implementation
            CHECK(reconstruction_residual(m, eig) <= 1e-9 * frobenius(m));

            for (std::size_t i = 0; i < d; ++i) {
                CHECK(std::abs(norm(eig.eigenvectors[i]) - 1.0) < 1e-10);
                if (i + 1 < d) CHECK(eig.eigenvalues[i] >= eig.eigenvalues[i + 1]);
                CHECK(eig.eigenvalues[i] >= 0.0);
                for (std::size_t j = i + 1; j < d; ++j)
                    CHECK(std::abs(dot(eig.eigenvectors[i], eig.eigenvectors[j])) < 1e-10);
                // sign convention: the first largest-magnitude component is non-negative
                std::size_t imax = 0;
                for (std::size_t c = 1; c < d; ++c)
                    if (std::abs(eig.eigenvectors[i][c]) > std::abs(eig.eigenvectors[i][imax]))
                        imax = c;
                CHECK(eig.eigenvectors[i][imax] >= 0.0);
            }
        }
    }
}

TEST_CASE("select_intrinsic_dim") {
    SUBCASE("a two-point partition keeps exactly one component") {
        const std::vector<Vec> pts = {Vec{0.0, 0.0}, Vec{1.0, 1.0}};
        const MeanCov mc = mean_and_covariance(pts);
        const EigenDecomposition eig = eigendecompose(mc.cov);
        CHECK(select_intrinsic_dim(eig, 2, DimRule::spacing()) == 1);
        CHECK(select_intrinsic_dim(eig, 2, DimRule::ratio_threshold(0.5)) == 1);
    }
    SUBCASE("collinear data is one-dimensional under the spacing rule") {
        std::vector<Vec> pts;
        for (int i = 0; i < 100; ++i)
            pts.push_back(Vec{static_cast<double>(i), 2.0 * static_cast<double>(i)});
        const MeanCov mc = mean_and_covariance(pts);
        const EigenDecomposition eig = eigendecompose(mc.cov);
        CHECK(select_intrinsic_dim(eig, 100, DimRule::spacing()) == 1);
    }
    SUBCASE("ratio rule at the documented threshold") {
        EigenDecomposition eig = identity_metric(2);
        eig.eigenvalues = {1.0, 0.16}; // sqrt ratio 0.4 < 0.5
        CHECK(select_intrinsic_dim(eig, 100, DimRule::ratio_threshold(0.5)) == 1);
        eig.eigenvalues = {1.0, 0.36}; // sqrt ratio 0.6 > 0.5
        CHECK(select_intrinsic_dim(eig, 100, DimRule::ratio_threshold(0.5)) == 2);
    }
    SUBCASE("uniform square data keeps both components") {
        auto data = testsupport::uniform_points(100, 2, 11);
        std::vector<Vec> pts;
        for (const auto& p : data) pts.push_back(p.coords);
        const MeanCov mc = mean_and_covariance(pts);
        const EigenDecomposition eig = eigendecompose(mc.cov);
        CHECK(select_intrinsic_dim(eig, 100, DimRule::spacing()) == 2);
    }
    SUBCASE("lambda never exceeds min(d, n-1)") {
        Rng rng(3);
        for (int rep = 0; rep < 50; ++rep) {
            const std::size_t d = 1 + rng.below(6);
            const SymMat m = random_psd(d, rng);
            const EigenDecomposition eig = eigendecompose(m);
            const std::uint64_t n = 1 + rng.below(10);
            const int lambda = select_intrinsic_dim(eig, n, DimRule::spacing());
            CHECK(lambda >= 0);
            CHECK(static_cast<std::uint64_t>(lambda) <= std::min<std::uint64_t>(d, n - 1));
        }
        CHECK(select_intrinsic_dim(identity_metric(4), 1, DimRule::spacing()) == 0);
    }
}

TEST_CASE("mahalanobis_sq") {
    SUBCASE("identity metric reduces to squared Euclidean") {
        CHECK(mahalanobis_sq(Vec{3.0, 4.0}, identity_metric(2)) == 25.0);
        Rng rng(5);
        for (int rep = 0; rep < 20; ++rep) {
            Vec v(3);
            for (int j = 0; j < 3; ++j) v[j] = rng.uniform(-10.0, 10.0);
            CHECK(mahalanobis_sq(v, identity_metric(3)) == norm_sq(v));
        }
    }
    SUBCASE("axis-aligned anisotropy") {
        EigenDecomposition metric = identity_metric(2);
        metric.eigenvalues = {4.0, 1.0};
        CHECK(mahalanobis_sq(Vec{2.0, 0.0}, metric) == 1.0);
    }
    SUBCASE("random 3D metric matches the explicit-inverse oracle") {
        Rng rng(9);
        for (int rep = 0; rep < 10; ++rep) {
            SymMat m = random_psd(3, rng);
            for (int i = 0; i < 3; ++i) m(i, i) += 0.5; // keep it comfortably PD
            const EigenDecomposition metric = eigendecompose(m);

            // 3x3 inverse by adjugate, written out here as the oracle.
            double a[3][3];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);
            const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
            double inv[3][3];
            inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
            inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
            inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
            inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
            inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
            inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
            inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
            inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
            inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;

            Vec delta(3);
            for (int j = 0; j < 3; ++j) delta[j] = rng.uniform(-2.0, 2.0);
            double expected = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) expected += delta[i] * inv[i][j] * delta[j];

            CHECK(mahalanobis_sq(delta, metric) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
    SUBCASE("zero metric is singular") {
        EigenDecomposition metric = identity_metric(2);
        metric.eigenvalues = {0.0, 0.0};
        CHECK_THROWS_AS(mahalanobis_sq(Vec{1.0, 0.0}, metric), SingularMetric);
    }
    SUBCASE("eigenvalues below the floor are dropped, not inverted") {
        EigenDecomposition metric = identity_metric(2);
        metric.eigenvalues = {1.0, 1e-30};
        CHECK(mahalanobis_sq(Vec{0.0, 5.0}, metric) == 0.0);
        CHECK(mahalanobis_sq(Vec{2.0, 5.0}, metric) == 4.0);
    }
}
