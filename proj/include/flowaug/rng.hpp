#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace flowaug {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a, used to turn stream names into fork tags.
inline std::uint64_t stream_tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Counter-based deterministic random stream (splitmix64 core).
//
// A stream is identified by a 64-bit key. Child streams are derived with
// fork(tag); equal (key, tag) always yields the same child, independent of
// how many values were drawn from the parent. Draw conventions:
//   - next_u64 / next_double: one splitmix64 step each
//   - gaussian(): consumes exactly two uniforms (Box-Muller, cosine branch)
//   - uniform_int / bernoulli / pick: consume exactly one uniform each
//   - shuffle(v): n-1 uniform_int draws, Fisher-Yates from the back
//   - sample_distinct(n, k): k uniform_int draws (partial Fisher-Yates)
class RngStream {
public:
    explicit RngStream(std::uint64_t key)
        : key_(key), state_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

    std::uint64_t key() const { return key_; }

    RngStream fork(std::uint64_t tag) const {
        return RngStream(mix64(key_ ^ mix64(tag + kGoldenGamma)));
    }
    RngStream fork(std::string_view name) const { return fork(stream_tag(name)); }
    RngStream fork(std::string_view name, std::uint64_t index) const {
        return fork(name).fork(index + 0x9e3779b9ULL);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += kGoldenGamma);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // [lo, hi), hi > lo
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // integer in [lo, hi], inclusive
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::int64_t span = hi - lo + 1;
        std::int64_t v = lo + static_cast<std::int64_t>(next_double() * static_cast<double>(span));
        return v > hi ? hi : v;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // standard normal, Box-Muller cosine branch; always two uniform draws
    double gaussian() {
        const double u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct values from {0..n-1}, in draw order
    std::vector<int> sample_distinct(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        if (k > n) k = n;
        for (int i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(uniform_int(i, n - 1));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        pool.resize(static_cast<std::size_t>(k));
        return pool;
    }

private:
    std::uint64_t key_;
    std::uint64_t state_;
};

}  // namespace flowaug
