#pragma once

#include <cstdint>

namespace evarbai {

/// SplitMix64 finalizer.  All randomness in the simulator is built from
/// this mixer so that every draw is a pure function of
/// (base seed, trial index, arm index, draw index) and therefore
/// independent of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream derivation: substream k of seed s is splitmix64(s ^ mix(k)).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t key) {
    return splitmix64(seed ^ splitmix64(key + 0x6A09E667F3BCC909ULL));
}

/// Counter-addressable generator: draw i of a stream is obtained by mixing
/// the stream seed with the counter, so streams can be replayed or split
/// without shared state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return splitmix64(seed_ + (++counter_) * kStep); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }

private:
    static constexpr std::uint64_t kStep = 0x9E3779B97F4A7C15ULL;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace evarbai
