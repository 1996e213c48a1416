#pragma once

#include <cstdint>

namespace rsctmc {

// SplitMix64. Chosen over <random> engines because its output is fixed by the
// algorithm, not implementation-defined, so estimates are bit-identical across
// platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double strictly inside (0,1); never returns 0 or 1, so
    /// -log(u) is finite and exponential sojourns are strictly positive.
    double uniform_open() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Stream seed for trajectory `index` under master `seed`. Each trajectory
/// gets an independent generator, so serial and fanned-out runs agree.
inline std::uint64_t trajectory_stream_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return mixer.next();
}

}  // namespace rsctmc
