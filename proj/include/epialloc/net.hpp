#ifndef EPIALLOC_NET_HPP
#define EPIALLOC_NET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "epialloc/linalg.hpp"

namespace epialloc::net {

/// Symmetric table of traffic distances between counties. Distances carry
/// whatever length unit the input uses; the network scale parameter lambda
/// must be expressed in the square of that unit. Diagonal entries are
/// ignored by all consumers.
struct DistanceTable {
    std::size_t n = 0;
    std::vector<std::string> labels;
    Matrix L;
};

/// Row-stochastic commute weight matrix: w_ij = lambda / L_ij^2 off the
/// diagonal, w_ii = 1 - sum of the rest of the row. All entries in [0, 1].
struct CommuteWeights {
    std::size_t n = 0;
    Matrix W;
    double lambda = 0.0;
};

/// Builds the commute weight matrix for a given scale. lambda = 0 yields the
/// identity (every county isolated). Throws WeightOutOfRange when lambda is
/// too large for this distance table (some w_ij > 1 or some diagonal < 0).
CommuteWeights build_weights(const DistanceTable& dist, double lambda);

/// Node strength of each county: the off-diagonal row sum, 1 - w_ii.
Vec node_strength(const CommuteWeights& w);

/// Largest lambda for which build_weights succeeds on this table.
double max_valid_lambda(const DistanceTable& dist);

/// Reads a distance table: first row and first column carry county labels,
/// cell (i, j) the distance. Mild asymmetry (at most 1% relative) is
/// averaged away; larger asymmetry is an error.
DistanceTable load_distance_table(const std::string& path);

/// Reads a two-column population table (label, count; header row required).
/// When a companion distance table is given, rows are reordered to its label
/// order and the label sets must match exactly.
std::vector<std::int64_t> load_population_table(const std::string& path,
                                                const DistanceTable* companion = nullptr);

} // namespace epialloc::net

#endif
