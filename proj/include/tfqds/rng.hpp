#pragma once

#include <cstdint>
#include <random>

namespace tfqds {

// splitmix64 mixing for deriving independent deterministic streams from a
// master seed. Trials and optimizer starts each get their own engine so
// results are order-independent and reproducible.
inline uint64_t splitmix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_engine(uint64_t seed, uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ stream));
}

}  // namespace tfqds
