#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "altcite/common.hpp"

namespace altcite::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    if (first) fail(Errc::empty_file, path + " has no header row");
    return t;
}

inline long long parse_count(const std::string& cell, const std::string& where) {
    std::string s = trim(cell);
    if (s.empty()) fail(Errc::parse_error, "empty numeric cell at " + where);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return v;
    // fall back for decimal-formatted integers such as "3.0"
    try {
        std::size_t used = 0;
        double d = std::stod(s, &used);
        if (used == s.size() && d == std::floor(d)) return static_cast<long long>(d);
    } catch (...) {
    }
    fail(Errc::parse_error, "not an integer count at " + where + ": '" + s + "'");
}

inline void write_file(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) fail(Errc::io_error, "cannot write " + path);
    for (std::size_t j = 0; j < header.size(); ++j)
        out << (j ? "," : "") << header[j];
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < r.size(); ++j)
            out << (j ? "," : "") << r[j];
        out << "\n";
    }
}

inline std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (j) s += ",";
        s += cells[j];
    }
    return s;
}

} // namespace altcite::csv
