// rng.hpp
// Deterministic, splittable random streams for reproducible Monte Carlo.
// Streams are keyed (e.g. by master seed, cell, trial index) so trials can
// run concurrently while results stay a pure function of the keys.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace pqsi {

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with explicit seeding; all derived quantities (uniform doubles,
// normals, bounded ints) are generated by code under our control so that a
// given key sequence produces identical draws on every platform.
class RngStream {
public:
    RngStream() : RngStream(0xdeadbeefULL) {}

    explicit RngStream(std::uint64_t seed) : stream_id_(seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    // Derive a stream from a key tuple. Keys are absorbed in order, so
    // (master, cell, trial) and (master, trial, cell) give distinct streams.
    static RngStream from_keys(std::initializer_list<std::uint64_t> keys) {
        std::uint64_t acc = 0x243f6a8885a308d3ULL;  // pi fractional bits
        for (std::uint64_t k : keys) {
            acc ^= k + 0x9e3779b97f4a7c15ULL + (acc << 6) + (acc >> 2);
            std::uint64_t t = acc;
            acc = splitmix64_next(t);
        }
        return RngStream(acc);
    }

    // Identifies the stream (the fully mixed seed); recorded in transcripts.
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - next_double();  // (0, 1]
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Unbiased uniform draw from {0, ..., n-1}.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool next_bernoulli(double p) { return next_double() < p; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
    std::uint64_t stream_id_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace pqsi
