#ifndef EPIALLOC_TABULAR_HPP
#define EPIALLOC_TABULAR_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace epialloc {

/// One parsed delimiter-separated file: comment/echo lines ("# ...") kept
/// separately from data rows. The delimiter is auto-detected per file
/// (comma, semicolon or tab; otherwise runs of spaces).
struct Table {
    std::vector<std::string> comments; // leading '#' lines, prefix stripped
    std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::string& path);

double parse_double(const std::string& cell, const std::string& context);
std::int64_t parse_int(const std::string& cell, const std::string& context);

/// Shortest decimal form that round-trips exactly to the same double.
/// Deterministic, locale-independent; used for every numeric output so
/// written files can be re-read bit-exactly.
std::string format_double(double v);

void write_file(const std::string& path, const std::string& contents);

} // namespace epialloc

#endif
