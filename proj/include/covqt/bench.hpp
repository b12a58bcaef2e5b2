#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "covqt/knn.hpp"
#include "covqt/tree.hpp"

namespace covqt {

/// Per-K aggregates of search cost over a fixed query set.
struct BenchAggregate {
    std::size_t k = 0;
    double nodes_min = 0.0, nodes_mean = 0.0, nodes_max = 0.0;
    double cand_min = 0.0, cand_mean = 0.0, cand_max = 0.0; // insertions per neighbor
    double wall_ms = 0.0;
};

struct BenchRun {
    std::string dataset;
    std::size_t query_count = 0;
    std::vector<BenchAggregate> rows;
};

/// Runs knn_find for every (query, K) pair and aggregates nodes visited and
/// candidates per neighbor. Requires at least 30 queries and an ascending
/// K list. Queries run concurrently; aggregation order is fixed.
BenchRun sweep(const Tree& tree, std::span<const Vec> queries, std::span<const std::size_t> k_list);

/// Writes the aggregates as CSV and as a gnuplot-friendly .dat (no timing
/// column). Pass include_timing = false to zero the wall-clock column for
/// byte-reproducible output. Empty path skips that file.
void emit(const BenchRun& run, const std::string& csv_path, const std::string& dat_path,
          bool include_timing = true);

/// Deterministic query mix: half drawn from the dataset itself, half uniform
/// over the data bounding box.
std::vector<Vec> make_queries(const Tree& tree, std::size_t count, std::uint64_t seed);

} // namespace covqt
