#include "covqt/tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "covqt/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "tree snapshots are written in host order and defined as little-endian");

namespace covqt {

unsigned child_index_at(const Vec& x, const Vec& origin, const EigenDecomposition& eig,
                        int lambda) {
    unsigned beta = 0;
    for (int j = 0; j < lambda; ++j) {
        beta <<= 1;
        if (offset_dot(x, origin, eig.eigenvectors[j]) >= 0.0) beta |= 1u;
    }
    return beta;
}

unsigned child_index(const Vec& delta, const EigenDecomposition& eig, int lambda) {
    const Vec origin(delta.dim(), 0.0);
    return child_index_at(delta, origin, eig, lambda);
}

std::vector<Vec> corner_normals(const EigenDecomposition& eig, int lambda, unsigned beta) {
    std::vector<Vec> normals;
    normals.reserve(lambda);
    for (int j = 0; j < lambda; ++j) {
        const unsigned bit = (beta >> (lambda - 1 - j)) & 1u;
        normals.push_back(bit ? negated(eig.eigenvectors[j]) : eig.eigenvectors[j]);
    }
    return normals;
}

namespace {

struct Builder {
    Tree* tree;
    std::vector<DataPoint>* points;
    std::vector<std::uint32_t>* order;
    std::vector<CovNode>* nodes;
    const TreeConfig* config;
    const double* weights; // indexed by point index, may be null
    const double* values;  // indexed by point index, may be null

    double dispersion_of(std::uint32_t lo, std::uint32_t hi) const {
        if (!values) return 0.0;
        double sum = 0.0;
        for (std::uint32_t i = lo; i < hi; ++i) sum += values[(*order)[i]];
        const double mean = sum / (hi - lo);
        double var = 0.0;
        for (std::uint32_t i = lo; i < hi; ++i) {
            const double d = values[(*order)[i]] - mean;
            var += d * d;
        }
        return std::sqrt(var / (hi - lo));
    }

    std::int32_t run(std::uint32_t lo, std::uint32_t hi, std::uint32_t depth, Vec corner_vertex,
                     std::vector<Vec> normals, double parent_dispersion) {
        const std::uint32_t m = hi - lo;

        std::vector<double> w;
        if (weights) {
            w.resize(m);
            for (std::uint32_t i = 0; i < m; ++i) w[i] = weights[(*order)[lo + i]];
        }
        MeanCov mc = mean_and_covariance_fn(
            m, [&](std::size_t i) -> const Vec& { return (*points)[(*order)[lo + i]].coords; },
            weights ? w.data() : nullptr);
        EigenDecomposition eig = eigendecompose(mc.cov);
        const int lambda = select_intrinsic_dim(eig, m, config->dim_rule);

        CovNode node;
        node.expectation = std::move(mc.mean);
        node.eig = std::move(eig);
        node.lambda = static_cast<std::uint8_t>(lambda);
        node.corner_vertex = std::move(corner_vertex);
        node.corner_normals = std::move(normals);
        node.n = m;
        node.depth = depth;
        if (values) {
            node.dispersion = dispersion_of(lo, hi);
            if (depth == 0) parent_dispersion = node.dispersion;
        }

        bool leaf = lambda == 0 || depth >= config->max_depth;
        if (config->mode == BuildMode::Knn) {
            leaf = leaf || m <= config->leaf_capacity;
        } else {
            leaf = leaf || node.dispersion <= config->tess_tolerance * parent_dispersion;
        }

        // Copies survive the arena push; the recursion below may reallocate it.
        const Vec mu = node.expectation;
        const EigenDecomposition split_eig = node.eig;
        const double disp = node.dispersion;

        const std::int32_t self = static_cast<std::int32_t>(nodes->size());
        nodes->push_back(std::move(node));

        if (leaf) {
            (*nodes)[self].first = lo;
            (*nodes)[self].count = m;
            return self;
        }

        const unsigned nchild = 1u << lambda;
        std::vector<std::uint32_t> counts(nchild, 0);
        std::vector<std::uint32_t> betas(m);
        for (std::uint32_t i = 0; i < m; ++i) {
            const Vec& x = (*points)[(*order)[lo + i]].coords;
            betas[i] = child_index_at(x, mu, split_eig, lambda);
            ++counts[betas[i]];
        }

        std::vector<std::uint32_t> offset(nchild, 0);
        for (unsigned b = 1; b < nchild; ++b) offset[b] = offset[b - 1] + counts[b - 1];

        // Stable scatter keeps input order inside each bucket: builds are deterministic.
        std::vector<std::uint32_t> scratch(m);
        {
            std::vector<std::uint32_t> cursor = offset;
            for (std::uint32_t i = 0; i < m; ++i) scratch[cursor[betas[i]]++] = (*order)[lo + i];
        }
        std::copy(scratch.begin(), scratch.end(), order->begin() + lo);

        std::vector<std::int32_t> kids(nchild, kNoChild);
        for (unsigned b = 0; b < nchild; ++b) {
            if (counts[b] == 0) continue;
            kids[b] = run(lo + offset[b], lo + offset[b] + counts[b], depth + 1, mu,
                          corner_normals(split_eig, lambda, b), disp);
        }
        (*nodes)[self].children = std::move(kids);
        return self;
    }
};

} // namespace

Tree Tree::build(std::vector<DataPoint> points, const TreeConfig& config, BuildAux aux) {
    if (points.empty()) throw EmptyPartition();
    if (config.leaf_capacity < 1) throw InvalidArgument("leaf_capacity must be at least 1");
    if (config.mode == BuildMode::Tessellation &&
        !(config.tess_tolerance > 0.0 && config.tess_tolerance < 1.0))
        throw InvalidArgument("tessellation tolerance must lie in (0, 1)");
    if (!aux.weights.empty() && aux.weights.size() != points.size())
        throw InvalidArgument("per-point weight count does not match point count");
    if (!aux.values.empty() && aux.values.size() != points.size())
        throw InvalidArgument("per-point value count does not match point count");

    const std::size_t d = points.front().coords.dim();
    if (d < 1 || d > kMaxDim)
        throw DimensionMismatch("dimensionality " + std::to_string(d) + " outside [1, " +
                                std::to_string(kMaxDim) + "]");
    for (const DataPoint& p : points) {
        if (p.coords.dim() != d)
            throw DimensionMismatch("expected " + std::to_string(d) + " components, got " +
                                    std::to_string(p.coords.dim()));
        if (!all_finite(p.coords))
            throw InvalidArgument("point " + std::to_string(p.id) + " has non-finite coordinates");
    }

    Tree tree;
    tree.dim_ = d;
    tree.config_ = config;
    tree.points_ = std::move(points);
    tree.rebuild_id_index();

    tree.leaf_order_.resize(tree.points_.size());
    for (std::uint32_t i = 0; i < tree.leaf_order_.size(); ++i) tree.leaf_order_[i] = i;
    tree.nodes_.reserve(2 * tree.points_.size());

    Builder builder{&tree,
                    &tree.points_,
                    &tree.leaf_order_,
                    &tree.nodes_,
                    &tree.config_,
                    aux.weights.empty() ? nullptr : aux.weights.data(),
                    aux.values.empty() ? nullptr : aux.values.data()};
    builder.run(0, static_cast<std::uint32_t>(tree.points_.size()), 0, Vec{}, {}, 0.0);
    return tree;
}

void Tree::rebuild_id_index() {
    id_index_.clear();
    id_index_.reserve(points_.size());
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
        if (!id_index_.emplace(points_[i].id, i).second)
            throw InvalidArgument("duplicate point id " + std::to_string(points_[i].id));
    }
}

std::uint32_t Tree::index_of_id(std::int64_t id) const {
    auto it = id_index_.find(id);
    if (it == id_index_.end()) throw InvalidArgument("unknown point id " + std::to_string(id));
    return it->second;
}

Census node_census(const Tree& tree) {
    Census c;
    c.nodes = tree.node_count();
    for (std::size_t i = 0; i < tree.node_count(); ++i) {
        const CovNode& node = tree.node(i);
        if (node.is_leaf()) ++c.leaves;
        c.max_depth = std::max(c.max_depth, node.depth);
        ++c.lambda_histogram[node.lambda];
    }
    return c;
}

// --- binary snapshot ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'Q', 'T', '1'};

template <class T>
void put(std::ostream& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <class T>
T get(std::istream& in) {
    char buf[sizeof(T)];
    in.read(buf, sizeof(T));
    if (!in) throw IoError("truncated tree snapshot");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

void put_vec(std::ostream& out, const Vec& v) {
    for (std::size_t i = 0; i < v.dim(); ++i) put<double>(out, v[i]);
}

Vec get_vec(std::istream& in, std::size_t d) {
    Vec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = get<double>(in);
    return v;
}

} // namespace

void Tree::save(std::ostream& out) const {
    out.write(kMagic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    put<std::uint64_t>(out, points_.size());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(config_.dim_rule.kind));
    put<double>(out, config_.dim_rule.ratio);
    put<std::uint32_t>(out, config_.leaf_capacity);
    put<std::uint32_t>(out, config_.max_depth);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(config_.mode));
    put<double>(out, config_.tess_tolerance);

    for (const DataPoint& p : points_) {
        put<std::int64_t>(out, p.id);
        put_vec(out, p.coords);
    }
    for (std::uint32_t idx : leaf_order_) put<std::uint32_t>(out, idx);

    put<std::uint64_t>(out, nodes_.size());
    for (const CovNode& node : nodes_) {
        put<std::uint32_t>(out, node.depth);
        put<std::uint64_t>(out, node.n);
        put<std::uint8_t>(out, node.lambda);
        put<double>(out, node.dispersion);
        put_vec(out, node.expectation);
        for (double ev : node.eig.eigenvalues) put<double>(out, ev);
        for (const Vec& v : node.eig.eigenvectors) put_vec(out, v);
        put<std::uint8_t>(out, node.corner_vertex.empty() ? 0 : 1);
        if (!node.corner_vertex.empty()) {
            put_vec(out, node.corner_vertex);
            put<std::uint8_t>(out, static_cast<std::uint8_t>(node.corner_normals.size()));
            for (const Vec& u : node.corner_normals) put_vec(out, u);
        }
        put<std::uint8_t>(out, node.is_leaf() ? 1 : 0);
        if (node.is_leaf()) {
            put<std::uint32_t>(out, node.first);
            put<std::uint32_t>(out, node.count);
        } else {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(node.children.size()));
            for (std::int32_t c : node.children) put<std::int32_t>(out, c);
        }
    }
    if (!out) throw IoError("failed to write tree snapshot");
}

void Tree::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    save(out);
    if (!out) throw IoError("failed to write " + path);
}

Tree Tree::load(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not a covariance quadtree snapshot (bad magic)");

    Tree tree;
    tree.dim_ = get<std::uint32_t>(in);
    if (tree.dim_ < 1 || tree.dim_ > kMaxDim) throw IoError("snapshot dimension out of range");
    const std::uint64_t n = get<std::uint64_t>(in);
    tree.config_.dim_rule.kind = static_cast<DimRule::Kind>(get<std::uint8_t>(in));
    tree.config_.dim_rule.ratio = get<double>(in);
    tree.config_.leaf_capacity = get<std::uint32_t>(in);
    tree.config_.max_depth = get<std::uint32_t>(in);
    tree.config_.mode = static_cast<BuildMode>(get<std::uint8_t>(in));
    tree.config_.tess_tolerance = get<double>(in);

    tree.points_.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        tree.points_[i].id = get<std::int64_t>(in);
        tree.points_[i].coords = get_vec(in, tree.dim_);
    }
    tree.leaf_order_.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        tree.leaf_order_[i] = get<std::uint32_t>(in);
        if (tree.leaf_order_[i] >= n) throw IoError("leaf order entry out of range");
    }

    const std::uint64_t node_count = get<std::uint64_t>(in);
    tree.nodes_.resize(node_count);
    for (std::uint64_t i = 0; i < node_count; ++i) {
        CovNode& node = tree.nodes_[i];
        node.depth = get<std::uint32_t>(in);
        node.n = get<std::uint64_t>(in);
        node.lambda = get<std::uint8_t>(in);
        node.dispersion = get<double>(in);
        node.expectation = get_vec(in, tree.dim_);
        node.eig.eigenvalues.resize(tree.dim_);
        for (std::size_t j = 0; j < tree.dim_; ++j) node.eig.eigenvalues[j] = get<double>(in);
        node.eig.eigenvectors.resize(tree.dim_);
        for (std::size_t j = 0; j < tree.dim_; ++j) node.eig.eigenvectors[j] = get_vec(in, tree.dim_);
        if (get<std::uint8_t>(in)) {
            node.corner_vertex = get_vec(in, tree.dim_);
            const std::uint8_t normals = get<std::uint8_t>(in);
            node.corner_normals.resize(normals);
            for (std::uint8_t j = 0; j < normals; ++j) node.corner_normals[j] = get_vec(in, tree.dim_);
        }
        if (get<std::uint8_t>(in)) {
            node.first = get<std::uint32_t>(in);
            node.count = get<std::uint32_t>(in);
            if (static_cast<std::uint64_t>(node.first) + node.count > n)
                throw IoError("leaf payload out of range");
        } else {
            const std::uint32_t nchild = get<std::uint32_t>(in);
            if (nchild > (1u << kMaxDim)) throw IoError("child fanout out of range");
            node.children.resize(nchild);
            for (std::uint32_t c = 0; c < nchild; ++c) {
                node.children[c] = get<std::int32_t>(in);
                if (node.children[c] != kNoChild &&
                    (node.children[c] < 0 || static_cast<std::uint64_t>(node.children[c]) >= node_count))
                    throw IoError("child index out of range");
            }
        }
    }
    tree.rebuild_id_index();
    return tree;
}

Tree Tree::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return load(in);
}

} // namespace covqt
