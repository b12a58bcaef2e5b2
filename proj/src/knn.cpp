#include "covqt/knn.hpp"

#include <algorithm>
#include <cmath>

#include "covqt/errors.hpp"

namespace covqt {

bool KnnList::insert(std::int64_t id, double key) {
    const KnnEntry candidate{id, key};
    auto before = [](const KnnEntry& a, const KnnEntry& b) {
        return a.key < b.key || (a.key == b.key && a.id < b.id);
    };
    if (full()) {
        if (!before(candidate, entries_.back())) return false;
        entries_.pop_back();
    }
    entries_.insert(std::upper_bound(entries_.begin(), entries_.end(), candidate, before),
                    candidate);
    return true;
}

double direct_distance(const Vec& query, const CovNode& node) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec& u : node.corner_normals)
        best = std::max(best, offset_dot(query, node.corner_vertex, u));
    return best;
}

double node_distance(const Vec& query, const CovNode& node, double inherited) {
    if (node.corner_normals.empty()) return 0.0; // root
    return std::max(inherited, direct_distance(query, node));
}

NodeReach descend_distance(const Vec& query, const CovNode& node, const NodeReach& inherited) {
    NodeReach reach = inherited;
    for (const Vec& u : node.corner_normals) {
        const double proj = offset_dot(query, node.corner_vertex, u);
        if (proj >= reach.dist) {
            reach.dist = proj;
            reach.max_normal = &u;
        }
    }
    return reach;
}

namespace {

/// Squared Mahalanobis distance from the query to the supporting hyperplane of
/// the recursive Euclidean distance: min of xi^2 over the half-space beyond the
/// maximising normal, i.e. d^2 / (u^T Sigma u). Components of u that fall into
/// the metric's dropped (floored) subspace make the bound vanish, since the
/// floored form ignores displacement along them.
double metric_plane_bound(const NodeReach& reach, const EigenDecomposition& metric) {
    if (!(reach.dist > 0.0) || reach.max_normal == nullptr) return 0.0;
    const double lead = metric.eigenvalues.empty() ? 0.0 : metric.eigenvalues.front();
    if (!(lead > 0.0)) throw SingularMetric();
    const double floor = kMetricEigenFloor * lead;

    double u_sigma_u = 0.0;
    double covered = 0.0;
    for (std::size_t j = 0; j < metric.dim(); ++j) {
        if (metric.eigenvalues[j] < floor) break;
        const double proj = dot(*reach.max_normal, metric.eigenvectors[j]);
        u_sigma_u += metric.eigenvalues[j] * proj * proj;
        covered += proj * proj;
    }
    if (covered < 1.0 - 1e-9 || !(u_sigma_u > 0.0)) return 0.0;
    return reach.dist * reach.dist / u_sigma_u;
}

} // namespace

double mahalanobis_node_distance(const Vec& query, const CovNode& node, const NodeReach& inherited,
                                 const MetricState& metric) {
    const NodeReach reach = descend_distance(query, node, inherited);
    return metric_plane_bound(reach, metric.metric);
}

namespace {

struct Searcher {
    const Tree& tree;
    const Vec& query;
    const MetricState* metric;
    KnnList& list;
    SearchStats& stats;
    SearchTrace* trace;

    double point_key(const DataPoint& p) const {
        if (metric) return mahalanobis_sq(query, p.coords, metric->metric);
        return dist(query, p.coords);
    }

    void visit(std::int32_t node_index, const NodeReach& inherited) {
        const CovNode& node = tree.node(node_index);
        const NodeReach reach = descend_distance(query, node, inherited);

        const double bound = metric ? metric_plane_bound(reach, metric->metric) : reach.dist;
        if (list.full() && bound > list.top_key()) {
            ++stats.nodes_visited;
            if (trace) trace->pruned_nodes.push_back(node_index);
            return;
        }

        if (node.is_leaf()) {
            // Each stored point counts as a unit node of its own.
            stats.nodes_visited += node.count;
            for (std::uint32_t idx : tree.leaf_points(node)) {
                const DataPoint& p = tree.points()[idx];
                if (list.insert(p.id, point_key(p))) ++stats.insertions;
            }
            return;
        }

        ++stats.nodes_visited;
        for (std::int32_t child : node.children)
            if (child != kNoChild) visit(child, reach);
    }
};

/// Relative change between successive eigenvalue vectors.
double eigenvalue_drift(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double scale = std::max(std::abs(a[j]), std::abs(b[j]));
        if (scale == 0.0) continue;
        worst = std::max(worst, std::abs(a[j] - b[j]) / scale);
    }
    return worst;
}

} // namespace

KnnResult knn_find(const Tree& tree, const Vec& query, std::size_t k, const MetricState* metric,
                   SearchTrace* trace) {
    if (k < 1) throw InvalidK("K must be at least 1");
    if (query.dim() != tree.dim())
        throw DimensionMismatch("query has " + std::to_string(query.dim()) +
                                " components, tree holds " + std::to_string(tree.dim()));

    KnnResult result{KnnList(std::min(k, tree.points().size()), metric != nullptr), {}};
    result.stats.k_exceeds_n = k > tree.points().size();
    Searcher searcher{tree, query, metric, result.list, result.stats, trace};
    searcher.visit(0, NodeReach{});
    return result;
}

KnnList brute_force_knn(std::span<const DataPoint> points, const Vec& query, std::size_t k,
                        const MetricState* metric) {
    if (points.empty()) throw EmptyPartition();
    KnnList list(std::min(k, points.size()), metric != nullptr);
    for (const DataPoint& p : points) {
        const double key =
            metric ? mahalanobis_sq(query, p.coords, metric->metric) : dist(query, p.coords);
        list.insert(p.id, key);
    }
    return list;
}

AknnResult anisotropic_knn(const Tree& tree, const Vec& query, std::size_t k, double tolerance,
                           int max_iterations) {
    if (k < 2) throw InvalidK("anisotropic search needs K >= 2 to estimate a covariance");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");

    const std::size_t d = tree.dim();
    AknnResult result{KnnList(0), MetricState{identity_metric(d)}, 0, false, {}};
    std::vector<double> prev_eigenvalues = result.metric.metric.eigenvalues;

    for (int iter = 1; iter <= max_iterations; ++iter) {
        KnnResult pass = knn_find(tree, query, k, &result.metric);
        result.stats.nodes_visited += pass.stats.nodes_visited;
        result.stats.insertions += pass.stats.insertions;
        result.stats.k_exceeds_n = pass.stats.k_exceeds_n;
        result.iterations = iter;

        // Covariance of the freshly returned neighborhood, about its own mean.
        const std::vector<KnnEntry>& entries = pass.list.entries();
        MeanCov mc = mean_and_covariance_fn(entries.size(), [&](std::size_t i) -> const Vec& {
            return tree.points()[tree.index_of_id(entries[i].id)].coords;
        });
        EigenDecomposition eig = eigendecompose(mc.cov);

        result.list = std::move(pass.list);
        if (!(eig.eigenvalues.front() > 0.0)) {
            // All K neighbors coincide; no usable covariance. Keep the previous
            // metric and stop: the same degenerate set would return forever.
            result.converged = true;
            return result;
        }

        const double drift = eigenvalue_drift(prev_eigenvalues, eig.eigenvalues);
        prev_eigenvalues = eig.eigenvalues;
        result.metric.metric = std::move(eig);
        if (drift <= tolerance) {
            result.converged = true;
            return result;
        }
    }
    return result; // iteration cap reached: last iterate, converged == false
}

} // namespace covqt
