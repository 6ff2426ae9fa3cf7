// rng.hpp
// Deterministic seeded randomness. Every consumer derives an independent
// stream from (master seed, stream id, index), so replays and worker splits
// reproduce byte-identical results.

#pragma once

#include <cstdint>

namespace belllab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
inline std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id,
                                 std::uint64_t index) {
    std::uint64_t s = mix(master + kGolden * (stream_id + 1));
    return mix(s + kGolden * (index + 1));
}

// splitmix64 generator; cheap enough to construct per round.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    // uniform in [0, 1), 53-bit resolution
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_coin() { return (next_u64() & 1ULL) != 0ULL; }

    int next_sign() { return next_coin() ? 1 : -1; }

private:
    std::uint64_t state_;
};

}  // namespace belllab::rng
