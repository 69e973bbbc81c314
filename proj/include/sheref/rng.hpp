#pragma once

#include <cstdint>
#include <random>

namespace sheref {

using Rng = std::mt19937_64;

// Deterministic per-replication substream. Serial and parallel execution use
// the same (master_seed, replication_index) derivation, so results do not
// depend on thread count.
inline Rng make_substream(std::uint64_t master_seed, std::uint64_t replication_index) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed & 0xffffffffULL),
        static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(replication_index & 0xffffffffULL),
        static_cast<std::uint32_t>(replication_index >> 32),
    };
    return Rng(seq);
}

inline double draw_uniform(Rng& rng) {
    // 53-bit uniform in (0,1); never returns exactly 0 or 1.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double draw_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

} // namespace sheref
