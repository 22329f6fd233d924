#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace fpt {

// Draws come from std::mt19937_64 seeded through std::seed_seq with the 32-bit
// halves of (seed, stream). Uniforms use the top 53 bits, so a given
// (seed, stream, draw index) reproduces bit-exactly on any conforming platform.
struct RNGSpec {
    static constexpr const char* algorithm = "mt19937_64/seed_seq(seed_lo,seed_hi,stream_lo,stream_hi)";
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

class Stream {
public:
    explicit Stream(const RNGSpec& spec) {
        std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                          static_cast<std::uint32_t>(spec.stream),
                          static_cast<std::uint32_t>(spec.stream >> 32)};
        engine_.seed(seq);
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as an argument to log and as a tail level.
    double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

private:
    std::mt19937_64 engine_;
};

}  // namespace fpt
