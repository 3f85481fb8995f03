#include "epialloc/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "epialloc/error.hpp"
#include "epialloc/tabular.hpp"

namespace epialloc::net {

namespace {

void check_distances(const DistanceTable& dist) {
    if (dist.labels.size() != dist.n || dist.L.rows() != dist.n || dist.L.cols() != dist.n)
        fail(Errc::DimensionMismatch, "distance table fields disagree on county count");
    for (std::size_t i = 0; i < dist.n; ++i)
        for (std::size_t j = 0; j < dist.n; ++j)
            if (i != j && !(dist.L(i, j) > 0.0))
                fail(Errc::NonPositiveDistance,
                     "distance " + dist.labels[i] + " -> " + dist.labels[j] + " is " +
                         format_double(dist.L(i, j)));
}

} // namespace

CommuteWeights build_weights(const DistanceTable& dist, double lambda) {
    check_distances(dist);
    if (lambda < 0.0) fail(Errc::WeightOutOfRange, "lambda must be nonnegative");
    const std::size_t n = dist.n;
    Matrix w(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double wij = lambda / (dist.L(i, j) * dist.L(i, j));
            if (wij > 1.0)
                fail(Errc::WeightOutOfRange, "w(" + dist.labels[i] + "," + dist.labels[j] +
                                                 ") = " + format_double(wij) + " exceeds 1");
            w(i, j) = wij;
            off += wij;
        }
        if (off > 1.0)
            fail(Errc::WeightOutOfRange, "row " + dist.labels[i] +
                                             " off-diagonal weights sum to " + format_double(off) +
                                             "; diagonal would be negative");
        w(i, i) = 1.0 - off;
    }
    return CommuteWeights{n, std::move(w), lambda};
}

Vec node_strength(const CommuteWeights& w) {
    Vec strength(w.n, 0.0);
    for (std::size_t i = 0; i < w.n; ++i) strength[i] = 1.0 - w.W(i, i);
    return strength;
}

double max_valid_lambda(const DistanceTable& dist) {
    check_distances(dist);
    // Two binding constraints: each w_ij <= 1 and each diagonal >= 0.
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dist.n; ++i) {
        double inv_sq_sum = 0.0;
        for (std::size_t j = 0; j < dist.n; ++j) {
            if (i == j) continue;
            double inv_sq = 1.0 / (dist.L(i, j) * dist.L(i, j));
            bound = std::min(bound, 1.0 / inv_sq);
            inv_sq_sum += inv_sq;
        }
        if (inv_sq_sum > 0.0) bound = std::min(bound, 1.0 / inv_sq_sum);
    }
    return std::isfinite(bound) ? bound : 0.0;
}

DistanceTable load_distance_table(const std::string& path) {
    Table t = read_table(path);
    if (t.rows.size() < 2) fail(Errc::ParseError, path + ": need a header row and data rows");
    const std::vector<std::string>& header = t.rows[0];
    if (header.size() < 2) fail(Errc::ParseError, path + ": header too short");
    const std::size_t n = header.size() - 1;
    if (t.rows.size() != n + 1)
        fail(Errc::ParseError, path + ": expected " + std::to_string(n) + " data rows, got " +
                                   std::to_string(t.rows.size() - 1));

    DistanceTable dist;
    dist.n = n;
    dist.labels.assign(header.begin() + 1, header.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (dist.labels[i].empty()) fail(Errc::ParseError, path + ": empty county label");
        for (std::size_t j = 0; j < i; ++j)
            if (dist.labels[i] == dist.labels[j])
                fail(Errc::ParseError, path + ": duplicate county label " + dist.labels[i]);
    }

    dist.L = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = t.rows[i + 1];
        if (row.size() != n + 1)
            fail(Errc::ParseError, path + ": row " + std::to_string(i + 2) + " has " +
                                       std::to_string(row.size()) + " cells, expected " +
                                       std::to_string(n + 1));
        if (row[0] != dist.labels[i])
            fail(Errc::ParseError, path + ": row label '" + row[0] +
                                       "' does not match column label '" + dist.labels[i] + "'");
        for (std::size_t j = 0; j < n; ++j)
            dist.L(i, j) = parse_double(row[j + 1], path + " row " + dist.labels[i]);
    }

    // Symmetrize: average mild asymmetry, reject anything above 1% relative.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double a = dist.L(i, j);
            double b = dist.L(j, i);
            double mean = 0.5 * (a + b);
            if (std::abs(a - b) > 0.01 * std::abs(mean))
                fail(Errc::AsymmetryError, path + ": distances " + dist.labels[i] + "<->" +
                                               dist.labels[j] + " differ by more than 1% (" +
                                               format_double(a) + " vs " + format_double(b) + ")");
            dist.L(i, j) = mean;
            dist.L(j, i) = mean;
        }
    }
    check_distances(dist);
    return dist;
}

std::vector<std::int64_t> load_population_table(const std::string& path,
                                                const DistanceTable* companion) {
    Table t = read_table(path);
    if (t.rows.size() < 2) fail(Errc::ParseError, path + ": need a header row and data rows");

    std::vector<std::string> labels;
    std::vector<std::int64_t> counts;
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != 2)
            fail(Errc::ParseError,
                 path + ": row " + std::to_string(r + 1) + " needs exactly 2 cells");
        std::int64_t count = parse_int(row[1], path + " row " + row[0]);
        if (count < 1)
            fail(Errc::NonPositivePopulation, path + ": population of " + row[0] + " is " +
                                                  std::to_string(count));
        labels.push_back(row[0]);
        counts.push_back(count);
    }

    if (companion == nullptr) return counts;

    std::map<std::string, std::int64_t> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!by_label.emplace(labels[i], counts[i]).second)
            fail(Errc::LabelMismatch, path + ": duplicate label " + labels[i]);
    }
    if (by_label.size() != companion->n)
        fail(Errc::LabelMismatch, path + ": " + std::to_string(by_label.size()) +
                                      " counties, distance table has " +
                                      std::to_string(companion->n));
    std::vector<std::int64_t> ordered;
    ordered.reserve(companion->n);
    for (const std::string& label : companion->labels) {
        auto it = by_label.find(label);
        if (it == by_label.end())
            fail(Errc::LabelMismatch, path + ": missing county " + label);
        ordered.push_back(it->second);
    }
    return ordered;
}

} // namespace epialloc::net
