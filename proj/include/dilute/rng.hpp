#pragma once

// Counter-based random streams. A stream is a pure function of
// (master seed, stream id, counter), so trials are reproducible and can be
// distributed over workers in any order.

#include <cstdint>

namespace dilute {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

class StreamRng {
  public:
    StreamRng(std::uint64_t master_seed, std::uint64_t stream)
        : key_(mix64(master_seed ^ mix64(stream + 0x9E3779B97F4A7C15ull))) {}

    std::uint64_t next_u64() { return mix64(key_ ^ (counter_++ * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull)); }

    // Unbiased uniform draw in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace dilute
