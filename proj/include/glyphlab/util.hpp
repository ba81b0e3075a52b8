#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace glyphlab {

// splitmix64 finalizer; used to derive independent per-entity seeds from a
// master seed so that results do not depend on processing order.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(a ^ mix_seed(b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b) ^ mix_seed(c));
}

// Explicit Fisher-Yates with a fully specified bounded draw. std::shuffle is
// implementation-defined, this is not.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// Worker count: hardware concurrency capped by GLYPHLAB_THREADS when set.
unsigned worker_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker; each index is processed by exactly one thread, so writes to
// per-index slots are race-free and results are schedule-independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace glyphlab
