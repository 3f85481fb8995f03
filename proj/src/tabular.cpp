#include "epialloc/tabular.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "epialloc/error.hpp"

namespace epialloc {

namespace {

char detect_delimiter(const std::string& line) {
    if (line.find(',') != std::string::npos) return ',';
    if (line.find(';') != std::string::npos) return ';';
    if (line.find('\t') != std::string::npos) return '\t';
    return ' ';
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_row(const std::string& line, char delim) {
    std::vector<std::string> cells;
    if (delim == ' ') {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) cells.push_back(tok);
        return cells;
    }
    std::string cur;
    for (char ch : line) {
        if (ch == delim) {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

} // namespace

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ParseError, "cannot open file: " + path);
    Table t;
    std::string line;
    char delim = 0;
    while (std::getline(in, line)) {
        std::string s = trim(line);
        if (s.empty()) continue;
        if (s[0] == '#') {
            t.comments.push_back(trim(s.substr(1)));
            continue;
        }
        if (delim == 0) delim = detect_delimiter(s);
        t.rows.push_back(split_row(s, delim));
    }
    return t;
}

double parse_double(const std::string& cell, const std::string& context) {
    double v{};
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        fail(Errc::ParseError, "bad number '" + cell + "' in " + context);
    return v;
}

std::int64_t parse_int(const std::string& cell, const std::string& context) {
    std::int64_t v{};
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        fail(Errc::ParseError, "bad integer '" + cell + "' in " + context);
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot open for writing: " + path);
    out << contents;
    if (!out) fail(Errc::IoError, "write failed: " + path);
}

} // namespace epialloc
