#include "agsr/rng.hpp"

#include "agsr/io.hpp"

namespace agsr {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

KeyedRng::KeyedRng(std::uint64_t seed, std::string_view key)
    : state_(seed ^ fnv1a64(key)) {
    // Burn one draw so nearby seeds decorrelate.
    splitmix64(state_);
}

std::uint64_t KeyedRng::next_u64() {
    return splitmix64(state_);
}

double KeyedRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool KeyedRng::bernoulli(double p) {
    return next_double() < p;
}

std::uint64_t KeyedRng::next_below(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling over the top range keeps the draw unbiased.
    const std::uint64_t limit = (~0ULL) - ((~0ULL) % n + 1) % n;
    std::uint64_t v = next_u64();
    while (v > limit) v = next_u64();
    return v % n;
}

} // namespace agsr
