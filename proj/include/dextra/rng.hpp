// Copyright 2026 dextra Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEXTRA_RNG_HPP
#define DEXTRA_RNG_HPP

#include <cmath>
#include <cstdint>

namespace dextra {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += UINT64_C(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
}

/// xoshiro256++ seeded through splitmix64. One instance per Monte Carlo
/// stream; streams for (seed, counter) pairs are independent regardless of
/// how work is chunked across threads.
class Xoshiro256 {
   public:
    Xoshiro256() : Xoshiro256(0, 0) {}

    Xoshiro256(uint64_t seed, uint64_t stream) {
        uint64_t sm = seed ^ (stream * UINT64_C(0x9E3779B97F4A7C15) + UINT64_C(0xD1B54A32D192ED03));
        for (auto& word : s_)
            word = splitmix64(sm);
    }

    uint64_t next() {
        uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// True with probability threshold / 2^64.
    bool bernoulli_threshold(uint64_t threshold) {
        return next() < threshold;
    }

    bool coin() {
        return next() >> 63;
    }

    /// Unbiased-enough integer in [0, bound) via multiply-shift.
    uint64_t below(uint64_t bound) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next()) * bound) >> 64);
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (one value per call, spare discarded
    /// to keep draw counts predictable).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0)
            u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

   private:
    static uint64_t rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    uint64_t s_[4];
};

/// Fixed-point Bernoulli threshold for probability p.
inline uint64_t probability_to_threshold(double p) {
    if (p <= 0.0)
        return 0;
    if (p >= 1.0)
        return UINT64_MAX;
    return static_cast<uint64_t>(p * 0x1.0p64);
}

}  // namespace dextra

#endif
