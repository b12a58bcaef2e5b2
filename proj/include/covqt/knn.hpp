#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "covqt/tree.hpp"

namespace covqt {

struct KnnEntry {
    std::int64_t id = 0;
    double key = 0.0; // Euclidean distance (isotropic) or squared Mahalanobis (anisotropic)
};

/// Capacity-K candidate list ordered ascending by (key, id). Ties at the
/// boundary are broken by ascending id so results are bit-reproducible.
class KnnList {
public:
    explicit KnnList(std::size_t capacity, bool squared_keys = false)
        : cap_(capacity), squared_(squared_keys) {
        entries_.reserve(capacity);
    }

    /// Places the candidate if it beats the current worst (or the list has
    /// room); returns whether an insertion happened.
    bool insert(std::int64_t id, double key);

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return cap_; }
    bool full() const { return entries_.size() == cap_; }
    bool empty() const { return entries_.empty(); }

    const KnnEntry& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<KnnEntry>& entries() const { return entries_; }

    double top_key() const { return entries_.back().key; }
    std::int64_t top_id() const { return entries_.back().id; }

    /// Whether keys are squared Mahalanobis distances rather than plain ones.
    bool squared_keys() const { return squared_; }

private:
    std::size_t cap_;
    bool squared_;
    std::vector<KnnEntry> entries_;
};

struct SearchStats {
    std::uint64_t nodes_visited = 0; // unit-node equivalents touched by the descent
    std::uint64_t insertions = 0;    // candidate placements (including later evictions)
    bool k_exceeds_n = false;
};

/// Eigendecomposition of the neighborhood covariance driving a Mahalanobis search.
struct MetricState {
    EigenDecomposition metric;
};

/// Query-to-node pseudo distance: the largest signed projection of
/// (query - corner vertex) onto the node's outward corner normals. At most
/// zero when the query lies inside or on the corner hyperplanes.
double direct_distance(const Vec& query, const CovNode& node);

/// Recursive query-to-node distance: max of the parent's value and the direct
/// distance; zero at the root, hence zero for any node enclosing the query.
double node_distance(const Vec& query, const CovNode& node, double inherited);

/// Threaded state of the recursive distance: the running max and the normal
/// that achieved it (needed to rescale the bound under a metric).
struct NodeReach {
    double dist = 0.0;
    const Vec* max_normal = nullptr;
};

/// Advances the recursive distance into `node`, keeping the maximising normal.
NodeReach descend_distance(const Vec& query, const CovNode& node, const NodeReach& inherited);

/// Squared Mahalanobis query-to-node bound: the metric distance to the
/// supporting hyperplane of the recursive Euclidean distance,
/// d^2 / (u_max^T Sigma u_max), with d the recursive Euclidean distance and
/// u_max its maximising normal; zero when d <= 0. Equals d^2 * u_max^T
/// Sigma^-1 u_max when u_max is a metric eigenvector, and stays a true lower
/// bound of the point distances in the node for every other direction.
double mahalanobis_node_distance(const Vec& query, const CovNode& node, const NodeReach& inherited,
                                 const MetricState& metric);

struct KnnResult {
    KnnList list;
    SearchStats stats;
};

/// Collects pruned subtree roots when attached to a search (test instrumentation).
struct SearchTrace {
    std::vector<std::int32_t> pruned_nodes;
};

/// Exact K nearest neighbors by pruned top-down descent. With a metric the
/// list keys are squared Mahalanobis distances; without, plain Euclidean.
KnnResult knn_find(const Tree& tree, const Vec& query, std::size_t k,
                   const MetricState* metric = nullptr, SearchTrace* trace = nullptr);

struct AknnResult {
    KnnList list;
    MetricState metric; // converged (or last-iterate) neighborhood covariance
    int iterations = 0;
    bool converged = false;
    SearchStats stats; // accumulated over all iterations
};

/// Anisotropic K nearest neighbors: alternate a Mahalanobis search with a
/// re-estimate of the neighborhood covariance, starting from the identity,
/// until the covariance eigenvalues stabilise within `tolerance` (relative)
/// or `max_iterations` passes have run.
AknnResult anisotropic_knn(const Tree& tree, const Vec& query, std::size_t k,
                           double tolerance = 1e-19, int max_iterations = 50);

/// Exhaustive oracle with the same distance conventions and tie-break.
KnnList brute_force_knn(std::span<const DataPoint> points, const Vec& query, std::size_t k,
                        const MetricState* metric = nullptr);

} // namespace covqt
