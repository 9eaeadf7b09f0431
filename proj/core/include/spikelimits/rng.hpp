#pragma once

#include <cstdint>

namespace spikelimits {

// Counter-based random stream: stream_u64(seed, k) is the k-th output of a
// splitmix64 generator seeded with `seed`. Entries can be generated in any
// order (or in parallel) and still agree bit-for-bit with sequential
// generation, which is what the per-entry determinism contract needs.
inline std::uint64_t stream_u64(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + (k + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform double in the open interval (0, 1): 53 mantissa bits, offset by
// half an ulp so 0 and 1 are never produced.
inline double stream_open01(std::uint64_t seed, std::uint64_t k) {
    return (static_cast<double>(stream_u64(seed, k) >> 11) + 0.5) * 0x1.0p-53;
}

// Splittable derivation of per-replication seeds: replication r of a run
// with master seed s draws from stream_u64(s ^ tag, r). The tag keeps rep
// streams disjoint from any direct use of the master seed.
inline std::uint64_t derive_rep_seed(std::uint64_t master_seed, std::uint64_t rep_index) {
    return stream_u64(master_seed ^ 0xA3C59AC2ED1030E1ULL, rep_index);
}

}  // namespace spikelimits
