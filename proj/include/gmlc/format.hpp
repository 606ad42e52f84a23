#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "gmlc/error.hpp"

namespace gmlc {

// Shortest decimal string that parses back to exactly the same double.
// Used everywhere a value lands in a text artifact (CSV, dataset files,
// reports), so reruns can be compared byte-for-byte.
inline std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// Hexadecimal float: exact by construction, independent of rounding mode.
inline std::string fmt_hex(double x) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%a", x);
    return std::string(buf, static_cast<size_t>(n));
}

// Accepts both decimal and hexadecimal floats; whole string must be consumed.
inline double parse_double(const std::string& s, const std::string& what) {
    if (s.empty()) throw DataError(what + ": empty number");
    const char* begin = s.c_str();
    char* end = nullptr;
    double x = std::strtod(begin, &end);
    if (end != begin + s.size()) throw DataError(what + ": bad number '" + s + "'");
    return x;
}

inline long parse_long(const std::string& s, const std::string& what) {
    if (s.empty()) throw DataError(what + ": empty integer");
    const char* begin = s.c_str();
    char* end = nullptr;
    long x = std::strtol(begin, &end, 10);
    if (end != begin + s.size()) throw DataError(what + ": bad integer '" + s + "'");
    return x;
}

}  // namespace gmlc
