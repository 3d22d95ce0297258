#pragma once

#include <cstdint>
#include <random>

namespace ssmlab {

/// splitmix64 step; good enough to decorrelate derived seeds.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic per-stream seed so independent draws (frames, realizations,
/// runs) never share an engine state, whatever order they run in.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 1));
}

inline std::mt19937_64 make_engine(uint64_t seed) {
    return std::mt19937_64(seed);
}

} // namespace ssmlab
