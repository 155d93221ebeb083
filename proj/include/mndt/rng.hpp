#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

/// Named, splittable random streams. Every random draw in the simulator comes
/// from a stream derived from (seed, name, index...), so results never depend
/// on evaluation order.
namespace mndt::rng {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (splitmix64(b) + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
}

/// FNV-1a; stable across platforms unlike std::hash.
constexpr std::uint64_t hash_name(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view name) {
    return combine(seed, hash_name(name));
}

template <typename... Ix>
constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view name, std::uint64_t first,
                                   Ix... rest) {
    std::uint64_t k = combine(stream_key(seed, name), first);
    ((k = combine(k, static_cast<std::uint64_t>(rest))), ...);
    return k;
}

template <typename... Ix>
Engine stream(std::uint64_t seed, std::string_view name, Ix... index) {
    return Engine(stream_key(seed, name, static_cast<std::uint64_t>(index)...));
}

/// Small-state generator for per-entity streams (one per user, link or step).
/// Satisfies UniformRandomBitGenerator, so std distributions accept it.
class SplitMix {
  public:
    using result_type = std::uint64_t;
    explicit constexpr SplitMix(std::uint64_t seed) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    constexpr result_type operator()() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

template <typename... Ix>
SplitMix light_stream(std::uint64_t seed, std::string_view name, Ix... index) {
    return SplitMix(stream_key(seed, name, static_cast<std::uint64_t>(index)...));
}

/// Uniform in (0,1) from a 64-bit key; never returns 0.
constexpr double key_to_unit(std::uint64_t k) {
    return (double(k >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/// Standard normal deterministically derived from a key (Box-Muller on two hashed uniforms).
inline double hashed_standard_normal(std::uint64_t key) {
    const double u1 = key_to_unit(splitmix64(key));
    const double u2 = key_to_unit(splitmix64(key ^ 0xD1B54A32D192ED03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace mndt::rng
