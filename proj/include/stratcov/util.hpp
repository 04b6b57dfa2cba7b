#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <system_error>

namespace stratcov {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

/// Packed index of the lower-triangle entry (i, j), i >= j.
inline int tri_index(int i, int j) { return i * (i + 1) / 2 + j; }

inline int tri_count(int n) { return n * (n + 1) / 2; }

inline double sqr(double x) { return x * x; }

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

}  // namespace stratcov
