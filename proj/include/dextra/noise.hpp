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

#ifndef DEXTRA_NOISE_HPP
#define DEXTRA_NOISE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dextra/circuit.hpp"
#include "dextra/rng.hpp"

namespace dextra {

struct NoiseParams {
    double p = 0.0;
    double inhomogeneity_sigma = 0.0;
    uint64_t seed = 0;

    void validate() const {
        if (!(p >= 0.0 && p <= 0.5))
            throw std::invalid_argument("NoiseParams: p must be in [0, 0.5]");
        if (!(inhomogeneity_sigma >= 0.0))
            throw std::invalid_argument("NoiseParams: inhomogeneity_sigma must be >= 0");
    }
};

enum class ChannelKind : uint8_t { depolarize1, depolarize2, x_flip, measurement_flip };

struct NoiseChannel {
    int instr_index;
    ChannelKind kind;
    double probability;
    int q0;
    int q1 = -1;      // second qubit for depolarize2
    int record = -1;  // measurement record for measurement_flip
    uint64_t threshold = 0;
};

/// Per-location scale factors for spatially inhomogeneous noise. Factors
/// are attached to qubits (one-qubit channels, resets, measurements) and to
/// qubit pairs (two-qubit channels), and stay fixed across all rounds.
struct InhomogeneityMap {
    std::vector<double> qubit_factor;
    std::map<std::pair<int, int>, double> pair_factor;

    double pair(int a, int b) const {
        auto it = pair_factor.find(std::minmax(a, b));
        return it == pair_factor.end() ? 1.0 : it->second;
    }
};

namespace detail {

inline double truncated_normal_factor(uint64_t seed, uint64_t salt, uint64_t key, double sigma, double upper) {
    Xoshiro256 rng(seed ^ salt, key);
    for (int attempt = 0; attempt < 1000; attempt++) {
        double f = 1.0 + sigma * rng.normal();
        if (f > 0.0 && f <= upper)
            return f;
    }
    return 1.0;
}

inline constexpr uint64_t kQubitFactorSalt = UINT64_C(0x71B1A5E00051DE5);
inline constexpr uint64_t kPairFactorSalt = UINT64_C(0x9A1755AA0F00D11);

}  // namespace detail

/// Draws one factor per qubit and one per plaquette-adjacent qubit pair
/// from Normal(1, sigma), truncated to keep every scaled probability at or
/// below 0.5. Deterministic given the seed, independent of call order.
inline InhomogeneityMap sample_inhomogeneity(const SurfaceCodePatch& patch, const NoiseParams& params) {
    params.validate();
    InhomogeneityMap map;
    int n = patch.num_qubits();
    map.qubit_factor.assign(n, 1.0);
    if (params.inhomogeneity_sigma == 0.0)
        return map;

    // 5p is the largest category multiplier, so this cap keeps every
    // scaled probability physical.
    double upper = params.p > 0.0 ? 0.5 / (5.0 * params.p) : 10.0;
    for (int q = 0; q < n; q++)
        map.qubit_factor[q] = detail::truncated_normal_factor(
            params.seed, detail::kQubitFactorSalt, static_cast<uint64_t>(q), params.inhomogeneity_sigma, upper);

    for (int k = 0; k < patch.num_stabilizers(); k++) {
        int anc = patch.ancilla_qubit(k);
        for (int dq : patch.plaquettes[k].support) {
            auto key = std::minmax(anc, dq);
            uint64_t id = static_cast<uint64_t>(key.first) * static_cast<uint64_t>(n) + static_cast<uint64_t>(key.second);
            map.pair_factor[key] = detail::truncated_normal_factor(
                params.seed, detail::kPairFactorSalt, id, params.inhomogeneity_sigma, upper);
        }
    }
    return map;
}

/// Run of consecutive channels sharing one probability; samplers draw the
/// gaps between hits geometrically instead of one Bernoulli per channel.
struct ChannelGroup {
    int begin;
    int end;
    uint64_t threshold;
    double log1m;  // log(1 - p)
};

struct NoisyCircuit {
    MemoryCircuit base;
    NoiseParams params;
    std::vector<NoiseChannel> channels;              // sorted by instr_index
    std::vector<std::pair<int, int>> channel_range;  // per instruction: [begin, end) into channels
    std::vector<ChannelGroup> groups;
    std::vector<std::pair<int, int>> group_range;    // per instruction: [begin, end) into groups

    const std::vector<NoiseChannel>& all_channels() const {
        return channels;
    }
};

/// Rebuilds the per-instruction channel index after channels are edited by
/// hand (tests, fault studies). Channels are stable-sorted by location.
inline void rebuild_channel_ranges(NoisyCircuit& noisy) {
    std::stable_sort(noisy.channels.begin(), noisy.channels.end(), [](const NoiseChannel& a, const NoiseChannel& b) {
        return a.instr_index < b.instr_index;
    });
    noisy.channel_range.assign(noisy.base.instructions.size(), {0, 0});
    noisy.groups.clear();
    noisy.group_range.assign(noisy.base.instructions.size(), {0, 0});
    size_t i = 0;
    for (size_t instr = 0; instr < noisy.base.instructions.size(); instr++) {
        int begin = static_cast<int>(i);
        int gbegin = static_cast<int>(noisy.groups.size());
        while (i < noisy.channels.size() && noisy.channels[i].instr_index == static_cast<int>(instr)) {
            size_t run = i;
            while (run < noisy.channels.size() && noisy.channels[run].instr_index == static_cast<int>(instr) &&
                   noisy.channels[run].threshold == noisy.channels[i].threshold)
                run++;
            noisy.groups.push_back(
                {static_cast<int>(i), static_cast<int>(run), noisy.channels[i].threshold,
                 std::log1p(-noisy.channels[i].probability)});
            i = run;
        }
        noisy.channel_range[instr] = {begin, static_cast<int>(i)};
        noisy.group_range[instr] = {gbegin, static_cast<int>(noisy.groups.size())};
    }
}

/// Attaches SI1000 noise channels, parameterized by the base rate p:
///   - two-qubit depolarizing p after every CX,
///   - one-qubit depolarizing p/10 after single-qubit gates and on qubits
///     idling during a gate layer,
///   - X flip 2p after every reset,
///   - classical flip 5p on every ancilla measurement,
///   - one-qubit depolarizing 2p on data qubits idling during
///     measure/reset layers.
/// Preparation and the final readout stay noiseless.
inline NoisyCircuit apply_si1000(const MemoryCircuit& circuit, const NoiseParams& params) {
    params.validate();
    NoisyCircuit noisy;
    noisy.base = circuit;
    noisy.params = params;
    noisy.channel_range.assign(circuit.instructions.size(), {0, 0});
    if (params.p == 0.0)
        return noisy;

    InhomogeneityMap inhom = sample_inhomogeneity(circuit.patch, params);
    const double p = params.p;

    auto add1 = [&](int instr, ChannelKind kind, double base_p, int q, int record = -1) {
        double prob = base_p * inhom.qubit_factor[q];
        noisy.channels.push_back({instr, kind, prob, q, -1, record, probability_to_threshold(prob)});
    };

    for (size_t i = 0; i < circuit.instructions.size(); i++) {
        const Instruction& instr = circuit.instructions[i];
        int begin = static_cast<int>(noisy.channels.size());
        switch (instr.op) {
            case Op::prep:
            case Op::final_measure:
                break;
            case Op::reset:
                for (int q : instr.qubits)
                    add1(static_cast<int>(i), ChannelKind::x_flip, 2.0 * p, q);
                break;
            case Op::hadamard:
                for (int q : instr.qubits)
                    add1(static_cast<int>(i), ChannelKind::depolarize1, p / 10.0, q);
                break;
            case Op::cx:
                for (size_t k = 0; k + 1 < instr.qubits.size(); k += 2) {
                    int a = instr.qubits[k];
                    int b = instr.qubits[k + 1];
                    double prob = p * inhom.pair(a, b);
                    noisy.channels.push_back(
                        {static_cast<int>(i), ChannelKind::depolarize2, prob, a, b, -1, probability_to_threshold(prob)});
                }
                break;
            case Op::measure:
                for (size_t k = 0; k < instr.qubits.size(); k++)
                    add1(
                        static_cast<int>(i), ChannelKind::measurement_flip, 5.0 * p, instr.qubits[k],
                        instr.first_record + static_cast<int>(k));
                break;
            case Op::idle:
                for (int q : instr.qubits)
                    add1(static_cast<int>(i), ChannelKind::depolarize1, instr.measure_reset_layer ? 2.0 * p : p / 10.0, q);
                break;
        }
        noisy.channel_range[i] = {begin, static_cast<int>(noisy.channels.size())};
    }

    for (const auto& c : noisy.channels)
        if (!(c.probability > 0.0 && c.probability <= 0.5))
            throw std::invalid_argument("apply_si1000: channel probability escaped [0, 0.5]");
    rebuild_channel_ranges(noisy);
    return noisy;
}

struct NoiseAudit {
    int n_cx = 0, n_1q_gate = 0, n_gate_idle = 0, n_reset = 0, n_measure = 0, n_mr_idle = 0;
    bool probabilities_ok = true;
};

/// Structural audit: recounts channel categories from the base circuit and
/// checks each channel probability against its category value times the
/// location's inhomogeneity factor.
inline NoiseAudit audit_si1000(const NoisyCircuit& noisy) {
    NoiseAudit audit;
    const double p = noisy.params.p;
    InhomogeneityMap inhom = sample_inhomogeneity(noisy.base.patch, noisy.params);

    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-15 * std::max(1.0, std::abs(b)); };

    for (const auto& c : noisy.channels) {
        const Instruction& instr = noisy.base.instructions[c.instr_index];
        double expected = -1.0;
        switch (instr.op) {
            case Op::cx:
                audit.n_cx++;
                expected = p * inhom.pair(c.q0, c.q1);
                break;
            case Op::hadamard:
                audit.n_1q_gate++;
                expected = (p / 10.0) * inhom.qubit_factor[c.q0];
                break;
            case Op::reset:
                audit.n_reset++;
                expected = 2.0 * p * inhom.qubit_factor[c.q0];
                break;
            case Op::measure:
                audit.n_measure++;
                expected = 5.0 * p * inhom.qubit_factor[c.q0];
                break;
            case Op::idle:
                if (instr.measure_reset_layer) {
                    audit.n_mr_idle++;
                    expected = 2.0 * p * inhom.qubit_factor[c.q0];
                } else {
                    audit.n_gate_idle++;
                    expected = (p / 10.0) * inhom.qubit_factor[c.q0];
                }
                break;
            default:
                audit.probabilities_ok = false;
                continue;
        }
        if (!close(c.probability, expected))
            audit.probabilities_ok = false;
    }
    return audit;
}

}  // namespace dextra

#endif
