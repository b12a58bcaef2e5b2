// covqt command line: build/persist covariance quadtrees, run isotropic and
// anisotropic kNN queries, render density fields, tessellate images, and
// benchmark search cost.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covqt/bench.hpp"
#include "covqt/density.hpp"
#include "covqt/errors.hpp"
#include "covqt/io.hpp"
#include "covqt/knn.hpp"
#include "covqt/tessellate.hpp"
#include "covqt/tree.hpp"

namespace {

covqt::DimRule parse_dim_rule(const std::string& text) {
    if (text == "spacing") return covqt::DimRule::spacing();
    if (text.rfind("ratio:", 0) == 0) {
        const double t = std::stod(text.substr(6));
        if (!(t > 0.0 && t < 1.0))
            throw covqt::InvalidArgument("ratio threshold must lie in (0, 1)");
        return covqt::DimRule::ratio_threshold(t);
    }
    throw covqt::InvalidArgument("unknown dim rule '" + text + "' (use spacing or ratio:<t>)");
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> ks;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        ks.push_back(std::stoul(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (ks.empty()) throw covqt::InvalidArgument("empty K list");
    return ks;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct GridArg {
    std::size_t w = 0, h = 0;
};

GridArg parse_grid(const std::string& text) {
    const std::size_t x = text.find('x');
    if (x == std::string::npos)
        throw covqt::InvalidArgument("grid must be WxH, e.g. 256x256");
    return {std::stoul(text.substr(0, x)), std::stoul(text.substr(x + 1))};
}

void write_neighbor_row(std::ofstream& out, std::int64_t query_id, const covqt::KnnList& list,
                        const covqt::SearchStats& stats) {
    out << query_id << ',' << list.size() << ',' << stats.nodes_visited << ','
        << stats.insertions << ',';
    for (std::size_t i = 0; i < list.size(); ++i) out << (i ? " " : "") << list[i].id;
    out << ',';
    for (std::size_t i = 0; i < list.size(); ++i) out << (i ? " " : "") << fmt(list[i].key);
}

int run(int argc, char** argv) {
    CLI::App app{"covariance hyper-quadtree spatial index"};
    app.require_subcommand(1);

    std::string points_path, tree_path, out_path, queries_path, image_path;
    std::string csv_path, dat_path, pgm_path;
    std::string dim_rule_text = "spacing";
    std::string k_list_text = "8,16,32,64,128,256,512";
    std::string grid_text = "256x256";
    std::vector<double> extent;
    std::size_t k = 1, sample_n = 1000, query_count = 40, n_total = 0;
    std::uint64_t seed = 1;
    std::uint32_t max_depth = 64, leaf_capacity = 1, levels = 4;
    int max_iters = 50;
    double tolerance = 1e-19, tess_tolerance = 0.1;
    bool no_timing = false, outline = false;

    CLI::App* cmd_build = app.add_subcommand("build", "build a tree from a point CSV");
    cmd_build->add_option("--points", points_path, "input point CSV")->required();
    cmd_build->add_option("--out", out_path, "output tree file")->required();
    cmd_build->add_option("--dim-rule", dim_rule_text, "spacing | ratio:<t>");
    cmd_build->add_option("--max-depth", max_depth, "depth cap");
    cmd_build->add_option("--leaf-capacity", leaf_capacity, "points per leaf");

    CLI::App* cmd_knn = app.add_subcommand("knn", "exact Euclidean k nearest neighbors");
    cmd_knn->add_option("--tree", tree_path, "tree file")->required();
    cmd_knn->add_option("--queries", queries_path, "query point CSV")->required();
    cmd_knn->add_option("--k", k, "neighbors per query")->required();
    cmd_knn->add_option("--out", out_path, "output CSV")->required();

    CLI::App* cmd_aknn = app.add_subcommand("aknn", "anisotropic (Mahalanobis) k nearest neighbors");
    cmd_aknn->add_option("--tree", tree_path, "tree file")->required();
    cmd_aknn->add_option("--queries", queries_path, "query point CSV")->required();
    cmd_aknn->add_option("--k", k, "neighbors per query")->required();
    cmd_aknn->add_option("--tolerance", tolerance, "bootstrap eigenvalue tolerance");
    cmd_aknn->add_option("--max-iters", max_iters, "bootstrap iteration cap");
    cmd_aknn->add_option("--out", out_path, "output CSV")->required();

    CLI::App* cmd_density = app.add_subcommand("density", "anisotropic kernel density field");
    cmd_density->add_option("--tree", tree_path, "tree file (2D data)")->required();
    cmd_density->add_option("--grid", grid_text, "raster size WxH");
    cmd_density->add_option("--extent", extent, "xmin ymin xmax ymax (default: data bbox)")
        ->expected(4);
    cmd_density->add_option("--k", k, "neighbors per estimate")->required();
    cmd_density->add_option("--n-total", n_total, "normalisation count (default: tree size)");
    cmd_density->add_option("--tolerance", tolerance, "bootstrap eigenvalue tolerance");
    cmd_density->add_option("--out-pgm", pgm_path, "grayscale output");
    cmd_density->add_option("--out-csv", csv_path, "numeric output");

    CLI::App* cmd_tess = app.add_subcommand("tessellate", "covariance tessellation of an image");
    cmd_tess->add_option("--image", image_path, "binary PGM/PPM input")->required();
    cmd_tess->add_option("--tolerance", tess_tolerance, "dispersion stop fraction");
    cmd_tess->add_option("--dim-rule", dim_rule_text, "spacing | ratio:<t>");
    cmd_tess->add_option("--levels", levels, "maximum tree level");
    cmd_tess->add_flag("--outline", outline, "stroke partition boundaries");
    cmd_tess->add_option("--out", out_path, "output PNM mosaic")->required();

    CLI::App* cmd_bench = app.add_subcommand("bench", "sweep search cost over K");
    cmd_bench->add_option("--points", points_path, "input point CSV")->required();
    cmd_bench->add_option("--queries", query_count, "number of queries (>= 30)");
    cmd_bench->add_option("--k-list", k_list_text, "comma separated ascending K values");
    cmd_bench->add_option("--seed", seed, "query sampling seed");
    cmd_bench->add_option("--dim-rule", dim_rule_text, "spacing | ratio:<t>");
    cmd_bench->add_option("--max-depth", max_depth, "depth cap");
    cmd_bench->add_flag("--no-timing", no_timing, "zero the wall-clock column");
    cmd_bench->add_option("--out-csv", csv_path, "aggregate CSV");
    cmd_bench->add_option("--out-dat", dat_path, "gnuplot data file");

    CLI::App* cmd_sample = app.add_subcommand("sample", "draw points from image intensity");
    cmd_sample->add_option("--image", image_path, "binary PGM/PPM input")->required();
    cmd_sample->add_option("--n", sample_n, "number of points")->required();
    cmd_sample->add_option("--seed", seed, "sampling seed");
    cmd_sample->add_option("--out", out_path, "output point CSV")->required();

    CLI11_PARSE(app, argc, argv);

    if (cmd_build->parsed()) {
        covqt::TreeConfig config;
        config.dim_rule = parse_dim_rule(dim_rule_text);
        config.max_depth = max_depth;
        config.leaf_capacity = leaf_capacity;
        covqt::Tree tree = covqt::Tree::build(covqt::read_point_csv(points_path), config);
        tree.save(out_path);
        const covqt::Census census = covqt::node_census(tree);
        std::cout << "points=" << tree.points().size() << " nodes=" << census.nodes
                  << " leaves=" << census.leaves << " max_depth=" << census.max_depth << "\n";
        return 0;
    }

    if (cmd_knn->parsed() || cmd_aknn->parsed()) {
        const covqt::Tree tree = covqt::Tree::load(tree_path);
        const std::vector<covqt::DataPoint> queries = covqt::read_point_csv(queries_path);
        std::ofstream out(out_path);
        if (!out) throw covqt::IoError("cannot open " + out_path + " for writing");

        if (cmd_knn->parsed()) {
            out << "query_id,k,nodes_visited,insertions,neighbors,distances\n";
            for (const covqt::DataPoint& q : queries) {
                const covqt::KnnResult res = covqt::knn_find(tree, q.coords, k);
                write_neighbor_row(out, q.id, res.list, res.stats);
                out << "\n";
            }
        } else {
            out << "query_id,k,nodes_visited,insertions,iterations,converged,"
                   "metric_eigenvalues,neighbors,xi2\n";
            for (const covqt::DataPoint& q : queries) {
                const covqt::AknnResult res =
                    covqt::anisotropic_knn(tree, q.coords, k, tolerance, max_iters);
                out << q.id << ',' << res.list.size() << ',' << res.stats.nodes_visited << ','
                    << res.stats.insertions << ',' << res.iterations << ','
                    << (res.converged ? 1 : 0) << ',';
                const auto& ev = res.metric.metric.eigenvalues;
                for (std::size_t j = 0; j < ev.size(); ++j) out << (j ? " " : "") << fmt(ev[j]);
                out << ',';
                for (std::size_t i = 0; i < res.list.size(); ++i)
                    out << (i ? " " : "") << res.list[i].id;
                out << ',';
                for (std::size_t i = 0; i < res.list.size(); ++i)
                    out << (i ? " " : "") << fmt(res.list[i].key);
                out << "\n";
            }
        }
        if (!out) throw covqt::IoError("failed to write " + out_path);
        return 0;
    }

    if (cmd_density->parsed()) {
        const covqt::Tree tree = covqt::Tree::load(tree_path);
        const GridArg g = parse_grid(grid_text);
        covqt::GridSpec grid{g.w, g.h, 0.0, 0.0, 1.0, 1.0};
        if (!extent.empty()) {
            grid.xmin = extent[0];
            grid.ymin = extent[1];
            grid.xmax = extent[2];
            grid.ymax = extent[3];
        } else {
            grid.xmin = grid.ymin = std::numeric_limits<double>::infinity();
            grid.xmax = grid.ymax = -std::numeric_limits<double>::infinity();
            for (const covqt::DataPoint& p : tree.points()) {
                grid.xmin = std::min(grid.xmin, p.coords[0]);
                grid.xmax = std::max(grid.xmax, p.coords[0]);
                grid.ymin = std::min(grid.ymin, p.coords[1]);
                grid.ymax = std::max(grid.ymax, p.coords[1]);
            }
        }
        const std::size_t total = n_total ? n_total : tree.points().size();
        const covqt::DensityField field = covqt::render_field(tree, grid, k, total, tolerance);
        if (!pgm_path.empty()) covqt::write_density_pgm(field, pgm_path);
        if (!csv_path.empty()) covqt::write_density_csv(field, csv_path);
        std::cout << "integral=" << fmt(field.integral) << "\n";
        return 0;
    }

    if (cmd_tess->parsed()) {
        const covqt::Image src = covqt::read_pnm(image_path);
        const covqt::Tessellation tess =
            covqt::tessellate(src, tess_tolerance, parse_dim_rule(dim_rule_text), levels, outline);
        covqt::write_pnm(tess.mosaic, out_path);
        const covqt::Census census = covqt::node_census(tess.tree);
        std::cout << "nodes=" << census.nodes << " leaves=" << census.leaves
                  << " max_depth=" << census.max_depth << "\n";
        return 0;
    }

    if (cmd_bench->parsed()) {
        covqt::TreeConfig config;
        config.dim_rule = parse_dim_rule(dim_rule_text);
        config.max_depth = max_depth;
        const covqt::Tree tree = covqt::Tree::build(covqt::read_point_csv(points_path), config);
        const std::vector<covqt::Vec> queries = covqt::make_queries(tree, query_count, seed);
        covqt::BenchRun run = covqt::sweep(tree, queries, parse_k_list(k_list_text));
        run.dataset = points_path;
        covqt::emit(run, csv_path, dat_path, !no_timing);
        for (const covqt::BenchAggregate& row : run.rows)
            std::cout << "K=" << row.k << " nodes_mean=" << row.nodes_mean
                      << " cand_mean=" << row.cand_mean << "\n";
        return 0;
    }

    if (cmd_sample->parsed()) {
        const covqt::Image img = covqt::read_pnm(image_path);
        covqt::write_point_csv(out_path, covqt::sample_image(img, sample_n, seed));
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const covqt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
