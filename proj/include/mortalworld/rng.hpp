#pragma once
// Counter-based splittable random generator.
//
// The generator is a SplitMix64-style bijective mixer applied to
// (key + counter * golden). Output depends only on (key, counter), so
// streams derived with distinct tags are independent and rollouts are
// reproducible regardless of scheduling. This algorithm is fixed for the
// project; platform generators are never used for simulation randomness.

#include <cstdint>
#include <span>

namespace mortalworld {

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    // Derives a new independent stream; does not advance this one.
    CounterRng split(std::uint64_t tag) const {
        return CounterRng(mix(key_ ^ mix(tag ^ 0x9e3779b97f4a7c15ULL)));
    }

    // Fixed stream-derivation hash used by the experiment harness:
    // hash(base_seed, stream_index, stream_tag).
    static std::uint64_t derive_key(std::uint64_t base_seed,
                                    std::uint64_t stream_index,
                                    std::uint64_t stream_tag) {
        std::uint64_t k = mix(base_seed ^ 0x6a09e667f3bcc909ULL);
        k = mix(k ^ mix(stream_index));
        k = mix(k ^ mix(stream_tag ^ 0xbb67ae8584caa73bULL));
        return k;
    }

    std::uint64_t next_u64() {
        return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_);
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n); n >= 1.
    std::size_t next_index(std::size_t n) {
        // Rejection-free modulo bias is negligible for desk-scale n, but
        // use Lemire-style multiply-shift to keep draws exact.
        __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
        return static_cast<std::size_t>(m >> 64);
    }

    // Standard normal via Box-Muller (one value per call, no caching so
    // the stream position stays a pure function of call count).
    double next_gaussian();

    // Inverse-CDF sample from an explicit probability row.
    std::size_t sample_row(std::span<const double> probs);

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace mortalworld
