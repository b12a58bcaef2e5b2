#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "covqt/linalg.hpp"
#include "covqt/vec.hpp"

namespace covqt {

struct DataPoint {
    std::int64_t id = 0;
    Vec coords;
};

enum class BuildMode : std::uint8_t { Knn = 0, Tessellation = 1 };

struct TreeConfig {
    DimRule dim_rule;
    std::uint32_t leaf_capacity = 1;
    std::uint32_t max_depth = 64;
    BuildMode mode = BuildMode::Knn;
    double tess_tolerance = 0.1; // fraction of the parent dispersion, Tessellation only
};

inline constexpr std::int32_t kNoChild = -1;

/// One partition of the hierarchy. A child's corner is the parent expectation
/// plus the parent's split eigenvectors re-signed to point out of the child's
/// hyperquadrant; the root carries no corner.
struct CovNode {
    Vec expectation;         // local mean
    EigenDecomposition eig;  // full local PCA (all d eigenpairs)
    std::uint8_t lambda = 0; // intrinsic dimensionality selected here
    double dispersion = 0.0; // stddev of the stop-rule scalar (Tessellation builds)

    Vec corner_vertex;                  // parent expectation; empty at root
    std::vector<Vec> corner_normals;    // outward unit normals, one per parent split axis
    std::vector<std::int32_t> children; // 2^lambda slots, kNoChild where empty; empty at leaves

    std::uint32_t first = 0; // leaf payload: range into Tree::leaf_order()
    std::uint32_t count = 0;
    std::uint64_t n = 0; // points in the partition
    std::uint32_t depth = 0;

    bool is_leaf() const { return children.empty(); }
};

/// Hyperquadrant classifier: packs the projection signs of delta onto the
/// first `lambda` eigenvectors into a child slot, most significant bit first.
/// A projection of exactly zero counts as the positive side.
unsigned child_index(const Vec& delta, const EigenDecomposition& eig, int lambda);

/// Same classifier evaluated as (x - origin) without a temporary.
unsigned child_index_at(const Vec& x, const Vec& origin, const EigenDecomposition& eig, int lambda);

/// Outward corner normals of child `beta`: u_j = (-1)^bit(j, beta) * v_j where
/// bit(j, beta) is the j-th left-to-right bit of beta written in lambda bits.
std::vector<Vec> corner_normals(const EigenDecomposition& eig, int lambda, unsigned beta);

/// Optional per-point inputs for Tessellation builds.
struct BuildAux {
    std::span<const double> weights; // PCA weights (e.g. pixel intensity)
    std::span<const double> values;  // scalar whose dispersion drives the stop rule
};

struct Census {
    std::uint64_t nodes = 0;
    std::uint64_t leaves = 0;
    std::uint32_t max_depth = 0;
    std::array<std::uint64_t, kMaxDim + 1> lambda_histogram{};
};

/// Immutable covariance hyper-quadtree. Build is single-writer; afterwards any
/// number of concurrent readers may query it.
class Tree {
public:
    static Tree build(std::vector<DataPoint> points, const TreeConfig& config, BuildAux aux = {});

    std::size_t dim() const { return dim_; }
    const TreeConfig& config() const { return config_; }

    const std::vector<DataPoint>& points() const { return points_; }
    const CovNode& node(std::size_t i) const { return nodes_[i]; }
    const CovNode& root() const { return nodes_.front(); }
    std::size_t node_count() const { return nodes_.size(); }

    /// Indices into points() owned by a leaf.
    std::span<const std::uint32_t> leaf_points(const CovNode& leaf) const {
        return {leaf_order_.data() + leaf.first, leaf.count};
    }
    std::span<const std::uint32_t> leaf_order() const { return leaf_order_; }

    std::uint32_t index_of_id(std::int64_t id) const;

    /// Versioned binary snapshot ("CQT1", little-endian, preorder node records).
    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static Tree load(std::istream& in);
    static Tree load(const std::string& path);

private:
    std::size_t dim_ = 0;
    TreeConfig config_;
    std::vector<DataPoint> points_;
    std::vector<std::uint32_t> leaf_order_; // permutation of point indices, leaves own ranges
    std::vector<CovNode> nodes_;            // preorder arena, nodes_[0] is the root
    std::unordered_map<std::int64_t, std::uint32_t> id_index_;

    void rebuild_id_index();
};

Census node_census(const Tree& tree);

} // namespace covqt
