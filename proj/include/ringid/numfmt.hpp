#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <system_error>

namespace ringid {

// Shortest decimal form that parses back to the identical double. Used for
// every number the library serializes so files and CSVs are reproducible
// byte for byte.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc())
        throw std::runtime_error("numfmt: to_chars failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("numfmt: bad number: " + s);
    return v;
}

inline uint64_t parse_u64(const std::string& s) {
    uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("numfmt: bad integer: " + s);
    return v;
}

} // namespace ringid
