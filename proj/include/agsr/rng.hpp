#pragma once

#include <cstdint>
#include <string_view>

namespace agsr {

// Counter-based deterministic stream: every draw is a pure function of
// (seed, key, counter), so per-artwork determinism survives concurrency and
// reordering. SplitMix64 over an FNV-mixed key.
class KeyedRng {
public:
    KeyedRng(std::uint64_t seed, std::string_view key);

    std::uint64_t next_u64();
    // Uniform in [0,1).
    double next_double();
    bool bernoulli(double p);
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t& state);

} // namespace agsr
