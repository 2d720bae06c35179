// format.hpp - round-trip float formatting and hashing for artifacts

#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace chiralent {

#ifndef CHIRALENT_VERSION
#define CHIRALENT_VERSION "0.1.0"
#endif

inline constexpr std::string_view version = CHIRALENT_VERSION;

// 17 significant digits: parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// 64-bit FNV-1a, as 16 hex digits.
inline std::string hash_hex(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace chiralent
