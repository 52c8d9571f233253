#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace hfl {

// splitmix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a stream seed from a base seed and up to three tags.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(base ^ 0x243f6a8885a308d3ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    return splitmix64(s ^ c);
}

// Deterministic random source. The engine is mt19937_64, whose raw output is
// pinned by the standard; every distribution is implemented here rather than
// taken from <random>, so draw sequences are identical across platforms and
// standard libraries. Any change to a draw sequence is a breaking change for
// replay and must bump the trace schema version.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [lo, hi], both inclusive. One draw per call.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return lo + static_cast<std::int64_t>(next_u64());  // full 64-bit span
        const auto scaled = static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * range) >> 64);
        return lo + static_cast<std::int64_t>(scaled);
    }

    /// Standard normal via Box-Muller (two draws per call, cosine branch only).
    double normal(double mean = 0.0, double sd = 1.0) {
        double u1 = uniform01();
        if (u1 == 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Normal truncated to [lo, hi] by rejection. Requires lo <= mean <= hi.
    double truncated_normal(double mean, double sd, double lo, double hi) {
        if (sd <= 0.0 || lo >= hi) return std::min(std::max(mean, lo), hi);
        for (int i = 0; i < 1000; ++i) {
            const double v = normal(mean, sd);
            if (v >= lo && v <= hi) return v;
        }
        return mean;  // unreachable for any sane truncation window
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct values from {0, ..., n-1}, returned sorted ascending.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(uniform_int(i, n - 1));
            std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        }
        idx.resize(static_cast<std::size_t>(k));
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace hfl
