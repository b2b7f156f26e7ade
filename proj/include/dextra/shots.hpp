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

#ifndef DEXTRA_SHOTS_HPP
#define DEXTRA_SHOTS_HPP

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dextra/pauli.hpp"

namespace dextra {

/// Packed detector and observable bits for a batch of shots. Detector bits
/// are stored 64 per word, one row per shot.
struct ShotBatch {
    uint64_t n_shots = 0;
    uint32_t n_detectors = 0;
    uint64_t seed = 0;
    std::vector<uint64_t> detector_words;   // n_shots * words_per_shot
    std::vector<uint64_t> observable_words; // packed across shots

    ShotBatch() = default;
    ShotBatch(uint64_t shots, uint32_t detectors, uint64_t seed_value)
        : n_shots(shots),
          n_detectors(detectors),
          seed(seed_value),
          detector_words(shots * words_for_bits(detectors), 0),
          observable_words(words_for_bits(shots), 0) {}

    size_t words_per_shot() const {
        return words_for_bits(n_detectors);
    }

    bool detector(uint64_t shot, uint32_t k) const {
        return (detector_words[shot * words_per_shot() + (k >> 6)] >> (k & 63)) & 1;
    }

    void set_detector(uint64_t shot, uint32_t k, bool v) {
        uint64_t& w = detector_words[shot * words_per_shot() + (k >> 6)];
        uint64_t mask = uint64_t{1} << (k & 63);
        w = v ? (w | mask) : (w & ~mask);
    }

    bool observable(uint64_t shot) const {
        return (observable_words[shot >> 6] >> (shot & 63)) & 1;
    }

    void set_observable(uint64_t shot, bool v) {
        uint64_t& w = observable_words[shot >> 6];
        uint64_t mask = uint64_t{1} << (shot & 63);
        w = v ? (w | mask) : (w & ~mask);
    }

    /// Detector indices that fired in one shot.
    std::vector<uint32_t> fired_detectors(uint64_t shot) const {
        std::vector<uint32_t> fired;
        const uint64_t* row = detector_words.data() + shot * words_per_shot();
        for (size_t w = 0; w < words_per_shot(); w++) {
            uint64_t bits = row[w];
            while (bits) {
                fired.push_back(static_cast<uint32_t>((w << 6) + std::countr_zero(bits)));
                bits &= bits - 1;
            }
        }
        return fired;
    }
};

inline constexpr uint32_t kShotBatchMagic = 0x44585342;  // "DXSB"

inline void write_shot_batch(std::ostream& out, const ShotBatch& batch) {
    auto put_u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(kShotBatchMagic);
    put_u32(1);
    put_u64(batch.n_shots);
    put_u32(batch.n_detectors);
    put_u32(0);
    put_u64(batch.seed);
    out.write(
        reinterpret_cast<const char*>(batch.detector_words.data()),
        static_cast<std::streamsize>(batch.detector_words.size() * 8));
    out.write(
        reinterpret_cast<const char*>(batch.observable_words.data()),
        static_cast<std::streamsize>(batch.observable_words.size() * 8));
}

inline ShotBatch read_shot_batch(std::istream& in) {
    auto get_u32 = [&] {
        uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_u64 = [&] {
        uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    if (get_u32() != kShotBatchMagic)
        throw std::runtime_error("shot batch: bad magic");
    if (get_u32() != 1)
        throw std::runtime_error("shot batch: unsupported version");
    uint64_t n_shots = get_u64();
    uint32_t n_detectors = get_u32();
    get_u32();
    uint64_t seed = get_u64();
    ShotBatch batch(n_shots, n_detectors, seed);
    in.read(
        reinterpret_cast<char*>(batch.detector_words.data()),
        static_cast<std::streamsize>(batch.detector_words.size() * 8));
    in.read(
        reinterpret_cast<char*>(batch.observable_words.data()),
        static_cast<std::streamsize>(batch.observable_words.size() * 8));
    if (!in)
        throw std::runtime_error("shot batch: truncated file");
    return batch;
}

/// Debug text format: one line per shot of 0/1 detector characters, a
/// space, then the observable bit.
inline std::string shot_batch_to_text(const ShotBatch& batch) {
    std::string out;
    out.reserve(batch.n_shots * (batch.n_detectors + 3));
    for (uint64_t s = 0; s < batch.n_shots; s++) {
        for (uint32_t k = 0; k < batch.n_detectors; k++)
            out.push_back(batch.detector(s, k) ? '1' : '0');
        out.push_back(' ');
        out.push_back(batch.observable(s) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

}  // namespace dextra

#endif
