#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace covqt {

/// Hard cap on the feature-space dimensionality handled by the library.
inline constexpr std::size_t kMaxDim = 16;

/// Dense d-dimensional coordinate vector, 1 <= d <= kMaxDim.
class Vec {
public:
    Vec() = default;
    explicit Vec(std::size_t dim, double fill = 0.0) : c_(dim, fill) {}
    Vec(std::initializer_list<double> xs) : c_(xs) {}

    std::size_t dim() const { return c_.size(); }
    bool empty() const { return c_.empty(); }

    double operator[](std::size_t i) const { return c_[i]; }
    double& operator[](std::size_t i) { return c_[i]; }

    const double* data() const { return c_.data(); }
    double* data() { return c_.data(); }

    auto begin() const { return c_.begin(); }
    auto end() const { return c_.end(); }

    bool operator==(const Vec&) const = default;

private:
    std::vector<double> c_;
};

inline Vec operator-(const Vec& a, const Vec& b) {
    Vec r(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec operator+(const Vec& a, const Vec& b) {
    Vec r(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec operator*(double s, const Vec& a) {
    Vec r(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) r[i] = s * a[i];
    return r;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

/// (q - origin) . dir without materialising the difference vector.
/// Summation order matches dot(q - origin, dir) exactly, so sign decisions made
/// with one form are reproduced bit-for-bit by the other.
inline double offset_dot(const Vec& q, const Vec& origin, const Vec& dir) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) s += (q[i] - origin[i]) * dir[i];
    return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline double dist_sq(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist_sq(a, b)); }

/// Component-wise negation; exact under IEEE-754, so flipped normals preserve
/// the bit pattern of projections up to sign.
inline Vec negated(const Vec& a) {
    Vec r(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) r[i] = -a[i];
    return r;
}

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace covqt
