#include "covqt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>

#include "covqt/errors.hpp"
#include "covqt/parallel.hpp"
#include "covqt/rng.hpp"

namespace covqt {

BenchRun sweep(const Tree& tree, std::span<const Vec> queries,
               std::span<const std::size_t> k_list) {
    if (queries.size() < 30)
        throw InvalidArgument("sweep needs at least 30 queries, got " +
                              std::to_string(queries.size()));
    if (!std::is_sorted(k_list.begin(), k_list.end()))
        throw InvalidArgument("K list must be ascending");

    BenchRun run;
    run.query_count = queries.size();
    run.rows.reserve(k_list.size());

    std::vector<SearchStats> stats(queries.size());
    for (std::size_t k : k_list) {
        const auto started = std::chrono::steady_clock::now();
        parallel_for(queries.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t q = begin; q < end; ++q)
                stats[q] = knn_find(tree, queries[q], k).stats;
        });
        const auto finished = std::chrono::steady_clock::now();

        BenchAggregate row;
        row.k = k;
        row.nodes_min = row.cand_min = std::numeric_limits<double>::infinity();
        double nodes_sum = 0.0, cand_sum = 0.0;
        for (const SearchStats& s : stats) {
            const double nodes = static_cast<double>(s.nodes_visited);
            const double cand = static_cast<double>(s.insertions) / static_cast<double>(k);
            row.nodes_min = std::min(row.nodes_min, nodes);
            row.nodes_max = std::max(row.nodes_max, nodes);
            row.cand_min = std::min(row.cand_min, cand);
            row.cand_max = std::max(row.cand_max, cand);
            nodes_sum += nodes;
            cand_sum += cand;
        }
        row.nodes_mean = nodes_sum / static_cast<double>(queries.size());
        row.cand_mean = cand_sum / static_cast<double>(queries.size());
        row.wall_ms = std::chrono::duration<double, std::milli>(finished - started).count();
        run.rows.push_back(row);
    }
    return run;
}

void emit(const BenchRun& run, const std::string& csv_path, const std::string& dat_path,
          bool include_timing) {
    char buf[256];
    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw IoError("cannot open " + csv_path + " for writing");
        csv << "k,nodes_min,nodes_mean,nodes_max,cand_min,cand_mean,cand_max,wall_ms\n";
        for (const BenchAggregate& r : run.rows) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                          r.nodes_min, r.nodes_mean, r.nodes_max, r.cand_min, r.cand_mean,
                          r.cand_max, include_timing ? r.wall_ms : 0.0);
            csv << buf;
        }
        if (!csv) throw IoError("failed to write " + csv_path);
    }
    if (!dat_path.empty()) {
        std::ofstream dat(dat_path);
        if (!dat) throw IoError("cannot open " + dat_path + " for writing");
        dat << "# k nodes_min nodes_mean nodes_max cand_min cand_mean cand_max\n";
        for (const BenchAggregate& r : run.rows) {
            std::snprintf(buf, sizeof buf, "%zu %.17g %.17g %.17g %.17g %.17g %.17g\n", r.k,
                          r.nodes_min, r.nodes_mean, r.nodes_max, r.cand_min, r.cand_mean,
                          r.cand_max);
            dat << buf;
        }
        if (!dat) throw IoError("failed to write " + dat_path);
    }
}

std::vector<Vec> make_queries(const Tree& tree, std::size_t count, std::uint64_t seed) {
    const std::size_t d = tree.dim();
    Vec lo(d, std::numeric_limits<double>::infinity());
    Vec hi(d, -std::numeric_limits<double>::infinity());
    for (const DataPoint& p : tree.points())
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], p.coords[j]);
            hi[j] = std::max(hi[j], p.coords[j]);
        }

    Rng rng(seed);
    std::vector<Vec> queries;
    queries.reserve(count);
    const std::size_t from_data = (count + 1) / 2;
    for (std::size_t i = 0; i < from_data; ++i)
        queries.push_back(tree.points()[rng.below(tree.points().size())].coords);
    for (std::size_t i = from_data; i < count; ++i) {
        Vec q(d);
        for (std::size_t j = 0; j < d; ++j) q[j] = rng.uniform(lo[j], hi[j]);
        queries.push_back(std::move(q));
    }
    return queries;
}

} // namespace covqt
