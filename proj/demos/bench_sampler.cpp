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

// Throughput harness: cost per shot should grow linearly with the circuit
// volume and stay flat in the shot count.

#include <chrono>
#include <cstdio>

#include "dextra/frame.hpp"
#include "dextra/matching.hpp"

int main() {
    using namespace dextra;
    using clock = std::chrono::steady_clock;

    std::printf("%-4s %-10s %-12s %-14s %-14s\n", "d", "shots", "us/shot", "volume", "ns/qubit-op");
    double per_vol_min = 1e9, per_vol_max = 0;
    for (int d : {3, 5, 7, 9}) {
        SurfaceCodePatch patch = build_patch(d);
        MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 3);
        NoisyCircuit noisy = apply_si1000(circuit, {0.003, 0.0, 5});
        FrameSampler sampler(noisy);
        auto ws = sampler.make_workspace();
        std::vector<uint64_t> row(words_for_bits(circuit.num_detectors()));
        uint64_t shots = d <= 5 ? 40000 : 10000;
        auto t0 = clock::now();
        for (uint64_t s = 0; s < shots; s++) {
            bool obs;
            sampler.sample_shot(5, s, ws, row.data(), obs);
        }
        double us = std::chrono::duration<double, std::micro>(clock::now() - t0).count() / shots;
        size_t volume = 0;  // qubit-operations per shot
        for (const auto& instr : circuit.instructions)
            volume += instr.qubits.size();
        volume += circuit.num_measurements();
        double per_vol = 1000.0 * us / static_cast<double>(volume);
        per_vol_min = std::min(per_vol_min, per_vol);
        per_vol_max = std::max(per_vol_max, per_vol);
        std::printf("%-4d %-10llu %-12.2f %-14zu %-14.2f\n", d, (unsigned long long)shots, us, volume, per_vol);
    }
    // Linearity in shots at fixed d.
    {
        SurfaceCodePatch patch = build_patch(5);
        MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 3);
        NoisyCircuit noisy = apply_si1000(circuit, {0.003, 0.0, 5});
        FrameSampler sampler(noisy);
        auto ws = sampler.make_workspace();
        std::vector<uint64_t> row(words_for_bits(circuit.num_detectors()));
        double base = 0;
        for (uint64_t shots : {10000ull, 40000ull, 160000ull}) {
            auto t0 = clock::now();
            for (uint64_t s = 0; s < shots; s++) {
                bool obs;
                sampler.sample_shot(6, s, ws, row.data(), obs);
            }
            double us = std::chrono::duration<double, std::micro>(clock::now() - t0).count() / shots;
            if (base == 0)
                base = us;
            std::printf("d=5 shots=%-8llu us/shot=%.2f (x%.2f of base)\n", (unsigned long long)shots, us,
                        us / base);
        }
    }
    std::printf("per qubit-op cost spread across distances: x%.2f (flat = linear in circuit volume)\n",
                per_vol_max / per_vol_min);
    return 0;
}
