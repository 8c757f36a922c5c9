#pragma once

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "colopred/error.hpp"

namespace colopred::detail {

// Shortest representation that round-trips the exact double; NaN prints "nan".
inline std::string fmt_double(double v) {
    if (v != v) return "nan";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Parses a numeric cell; returns NaN for anything unparseable (including the
// literal nan, any case) instead of failing.
inline double parse_cell_lenient(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double out = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        return std::numeric_limits<double>::quiet_NaN();
    return out;
}

// Strict variant for structural fields (times, counts); throws bad_format.
inline double parse_cell_strict(std::string_view s, const std::string& what) {
    double v = parse_cell_lenient(s);
    if (v != v && !(s == "nan" || s == "NaN" || s == "NAN"))
        throw Error(Errc::bad_format, "cannot parse numeric field " + what + " from '" +
                                          std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            std::string_view f = line.substr(start, i - start);
            if (!f.empty() && f.back() == '\r') f.remove_suffix(1);
            out.emplace_back(f);
            start = i + 1;
        }
    }
    return out;
}

}  // namespace colopred::detail
