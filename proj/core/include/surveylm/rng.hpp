#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "surveylm/error.hpp"

namespace surveylm::rng {

// splitmix64, the recommended seeding mixer for 64-bit generators.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent child seed from (seed, tag, index). Every source of
/// randomness in a run is derived from the single master seed through this,
/// so concurrency and work ordering cannot change results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = seed ^ h;
    std::uint64_t a = splitmix64(state);
    state ^= index * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(state);
    return a ^ (b + 0x632be59bd9b4e019ULL);
}

/// Deterministic random stream. mt19937_64 output is fully specified by the
/// standard and all sampling below avoids std::*_distribution (whose output
/// is implementation-defined), so streams reproduce across platforms.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) without modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw Error("Stream::below: n must be positive");
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    /// Samples an index from an (unnormalized is tolerated) probability vector.
    int categorical(std::span<const double> probs) {
        if (probs.empty()) throw Error("Stream::categorical: empty distribution");
        double total = 0;
        for (double p : probs) total += p;
        double u = unit() * total;
        double acc = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size() - 1);  // rounding residue
    }

    /// Fisher-Yates permutation of {0..k-1}.
    std::vector<int> permutation(int k) {
        std::vector<int> p(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = i;
        for (int i = k - 1; i > 0; --i) {
            auto j = static_cast<std::size_t>(below(static_cast<std::uint64_t>(i) + 1));
            std::swap(p[static_cast<std::size_t>(i)], p[j]);
        }
        return p;
    }

    /// First n entries of a Fisher-Yates shuffle of {0..total-1}: a uniform
    /// sample of n distinct indices, in random order.
    std::vector<long> sample_indices(long total, long n) {
        if (n > total) throw Error("Stream::sample_indices: n exceeds population");
        std::vector<long> idx(static_cast<std::size_t>(total));
        for (long i = 0; i < total; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (long i = 0; i < n; ++i) {
            auto j = i + static_cast<long>(below(static_cast<std::uint64_t>(total - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(n));
        return idx;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace surveylm::rng
