#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vizbox {

// Bad or inconsistent input data / artifacts. CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Wrong invocation (unknown flag, missing argument...). CLI maps this to exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure during training (NaN/Inf in loss or gradients). CLI maps this to exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Deterministic RNG. We roll our own generator and uniform/shuffle helpers
// because the std distributions are implementation-defined and we promise
// byte-identical artifacts for a given seed across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        // xorshift-multiply (splitmix64-style) state walk: simple, fast, reproducible.
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // [0, n), unbiased via rejection
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int(0)");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % n;
    }

    // standard normal via Box-Muller (deterministic, no cached spare)
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

// FNV-1a 64-bit, used to fingerprint artifacts that must stay paired
// (discretization map <-> model trained on it).
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& s) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(s);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

// A cell is missing when empty or a common null spelling.
bool is_missing_cell(const std::string& raw);

// ASCII trim/lower helpers (cell parsing is locale-independent by design).
std::string trim(const std::string& s);
std::string to_lower(const std::string& s);

}  // namespace vizbox
