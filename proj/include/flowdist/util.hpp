#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace flowdist {

// Deterministic draws on top of mt19937_64. The std distributions are
// implementation-defined, so sampled output would differ between standard
// libraries; these mappings are fixed.
namespace rng {

// Uniform integer in [0, n). Rejection sampling, unbiased.
inline std::uint64_t below(std::mt19937_64& gen, std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
    std::uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * unit(gen);
}

// Standard normal via Box-Muller (polar form avoided to keep draw count fixed).
inline double normal(std::mt19937_64& gen) {
    double u1 = unit(gen);
    while (u1 <= 0.0) u1 = unit(gen);
    const double u2 = unit(gen);
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace rng

// FNV-1a, used for provenance hashes and per-dataset seed derivation.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// UTC calendar date of a millisecond epoch timestamp, as "YYYY-MM-DD".
// Civil-from-days conversion (Gregorian, proleptic); handles pre-1970.
std::string utc_date_of_ms(std::int64_t epoch_ms);

}  // namespace flowdist
