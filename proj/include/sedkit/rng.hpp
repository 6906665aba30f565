// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace sedkit {

/// SplitMix64 (Steele, Lea & Flood; public-domain reference constants).
/// The state advances by the 64-bit golden-ratio increment and each output
/// is the finalizer mix of the new state. The integer stream is bit-exact
/// on every platform, which is what keeps golden files stable; callers must
/// not substitute std::mt19937 or <random> distributions, whose streams are
/// implementation-defined.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n) via the 64x64 -> high-64 multiply
    /// (Lemire's multiply-shift). Bias is < 2^-64 per draw.
    std::uint64_t uniform_int(std::uint64_t n) { return mul_hi(next(), n); }

    /// Standard normal via Box-Muller. Consumes exactly two draws per call
    /// so the stream position is call-count deterministic.
    double gaussian() {
        // u1 in (0,1] so log() stays finite.
        const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static std::uint64_t mul_hi(std::uint64_t a, std::uint64_t b) {
        const std::uint64_t a_lo = a & 0xFFFFFFFFULL, a_hi = a >> 32;
        const std::uint64_t b_lo = b & 0xFFFFFFFFULL, b_hi = b >> 32;
        const std::uint64_t mid1 = a_hi * b_lo + ((a_lo * b_lo) >> 32);
        const std::uint64_t mid2 = a_lo * b_hi + (mid1 & 0xFFFFFFFFULL);
        return a_hi * b_hi + (mid1 >> 32) + (mid2 >> 32);
    }

    std::uint64_t state_;
};

/// Derives an independent child seed, e.g. one per clip index. Defined as
/// the first SplitMix64 output of (seed XOR golden-ratio-scrambled index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1))).next();
}

}  // namespace sedkit
