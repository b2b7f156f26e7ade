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

#ifndef DEXTRA_FRAME_HPP
#define DEXTRA_FRAME_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dextra/circuit.hpp"
#include "dextra/noise.hpp"
#include "dextra/pauli.hpp"
#include "dextra/rng.hpp"
#include "dextra/shots.hpp"
#include "dextra/tableau.hpp"

namespace dextra {

namespace detail {

inline bool frame_flips_record(const PauliString& frame, const MeasuredOp& op) {
    switch (op.kind) {
        case 'Z':
            return frame.x.get(op.qubit);
        case 'X':
            return frame.z.get(op.qubit);
        case 'Y':
            return frame.x.get(op.qubit) ^ frame.z.get(op.qubit);
        default:
            return frame.x.and_parity(op.product.z) ^ frame.z.and_parity(op.product.x);
    }
}

inline void frame_apply_single(PauliString& frame, int q, char p) {
    if (p == 'X' || p == 'Y')
        frame.x.toggle(q);
    if (p == 'Z' || p == 'Y')
        frame.z.toggle(q);
}

inline void frame_apply_instruction(PauliString& frame, const Instruction& instr) {
    switch (instr.op) {
        case Op::prep:
            frame.x.clear();
            frame.z.clear();
            break;
        case Op::reset:
            for (int q : instr.qubits) {
                frame.x.set(q, false);
                frame.z.set(q, false);
            }
            break;
        case Op::hadamard:
            for (int q : instr.qubits) {
                bool xb = frame.x.get(q), zb = frame.z.get(q);
                frame.x.set(q, zb);
                frame.z.set(q, xb);
            }
            break;
        case Op::cx:
            for (size_t k = 0; k + 1 < instr.qubits.size(); k += 2) {
                int c = instr.qubits[k], t = instr.qubits[k + 1];
                if (frame.x.get(c))
                    frame.x.toggle(t);
                if (frame.z.get(t))
                    frame.z.toggle(c);
            }
            break;
        case Op::measure:
        case Op::final_measure:
        case Op::idle:
            break;
    }
}

inline int instruction_record_count(const MemoryCircuit& circuit, size_t instr_index) {
    const Instruction& instr = circuit.instructions[instr_index];
    if (instr.op == Op::measure)
        return static_cast<int>(instr.qubits.size());
    if (instr.op == Op::final_measure)
        return circuit.num_measurements() - instr.first_record;
    return 0;
}

}  // namespace detail

/// Noiseless propagation of an initial frame injected just before
/// `start_record` (or before instruction `instr_begin` when start_record is
/// negative). Returns the records the frame flips.
inline BitVec propagate_frame(
    const MemoryCircuit& circuit, PauliString frame, size_t instr_begin, int start_record = -1) {
    BitVec flips(circuit.num_measurements());
    for (size_t i = instr_begin; i < circuit.instructions.size(); i++) {
        const Instruction& instr = circuit.instructions[i];
        int count = detail::instruction_record_count(circuit, i);
        for (int k = 0; k < count; k++) {
            int record = instr.first_record + k;
            if (start_record >= 0 && record < start_record)
                continue;
            if (detail::frame_flips_record(frame, circuit.measured_ops[record]))
                flips.set(record, true);
        }
        detail::frame_apply_instruction(frame, instr);
    }
    return flips;
}

/// Everything the frame sampler needs about a circuit's noiseless
/// behaviour: reference outcomes, which records are noiselessly random, and
/// per-coin record-flip masks whose detector parity has been verified to
/// vanish.
struct CircuitReference {
    int n_records = 0;
    BitVec is_deterministic;
    BitVec ref_outcome;
    bool observable_ref_parity = false;
    bool observable_deterministic = true;
    std::vector<int> coin_records;
    std::vector<BitVec> coin_masks;

    /// +1 when the noiseless observable parity is even, else -1.
    int noiseless_sign() const {
        return observable_ref_parity ? -1 : 1;
    }
};

inline CircuitReference prepare_reference(const MemoryCircuit& circuit) {
    TableauReference tab = reference_run(circuit);
    CircuitReference ref;
    ref.n_records = circuit.num_measurements();
    ref.is_deterministic = tab.is_deterministic;
    ref.ref_outcome = tab.ref_outcome;
    for (int m : circuit.observable.measurement_indices)
        ref.observable_ref_parity ^= tab.ref_outcome.get(m);

    // Locate the instruction of every record to start mid-circuit walks.
    std::vector<int> record_instr(ref.n_records, -1);
    for (size_t i = 0; i < circuit.instructions.size(); i++) {
        int count = detail::instruction_record_count(circuit, i);
        for (int k = 0; k < count; k++)
            record_instr[circuit.instructions[i].first_record + k] = static_cast<int>(i);
    }

    for (int record = 0; record < ref.n_records; record++) {
        if (tab.is_deterministic.get(record))
            continue;
        const PauliString& randomizer = tab.randomizers[tab.randomizer_index[record]];
        BitVec mask = propagate_frame(circuit, randomizer, record_instr[record], record);
        if (!mask.get(record))
            throw std::logic_error("prepare_reference: randomizer fails to flip its own record");
        for (const auto& det : circuit.detectors) {
            bool parity = false;
            for (int m : det.measurement_indices)
                parity ^= mask.get(m);
            if (parity)
                throw std::logic_error("prepare_reference: measurement randomizer leaks into a detector");
        }
        bool obs = false;
        for (int m : circuit.observable.measurement_indices)
            obs ^= mask.get(m);
        if (obs)
            ref.observable_deterministic = false;
        ref.coin_records.push_back(record);
        ref.coin_masks.push_back(std::move(mask));
    }
    return ref;
}

/// Monte Carlo Pauli-frame sampler. Shot i draws from a dedicated RNG
/// stream derived from (seed, i), so results are independent of chunking
/// and worker count.
class FrameSampler {
   public:
    explicit FrameSampler(const NoisyCircuit& noisy)
        : noisy_(&noisy), circuit_(&noisy.base), ref_(prepare_reference(noisy.base)) {}

    const CircuitReference& reference() const {
        return ref_;
    }
    const MemoryCircuit& circuit() const {
        return *circuit_;
    }

    struct Workspace {
        PauliString frame;
        BitVec flips;
    };

    Workspace make_workspace() const {
        return {PauliString(circuit_->num_qubits()), BitVec(circuit_->num_measurements())};
    }

    /// Samples one shot; fills the packed detector row and observable bit.
    void sample_shot(uint64_t seed, uint64_t shot, Workspace& ws, uint64_t* det_row, bool& observable) const {
        Xoshiro256 rng(seed, shot);
        ws.frame.x.clear();
        ws.frame.z.clear();
        ws.flips.clear();

        const auto& instructions = circuit_->instructions;
        for (size_t i = 0; i < instructions.size(); i++) {
            const Instruction& instr = instructions[i];
            int count = detail::instruction_record_count(*circuit_, i);
            for (int k = 0; k < count; k++) {
                int record = instr.first_record + k;
                if (detail::frame_flips_record(ws.frame, circuit_->measured_ops[record]))
                    ws.flips.set(record, true);
            }
            detail::frame_apply_instruction(ws.frame, instr);

            auto [gbegin, gend] = noisy_->group_range.empty() ? std::pair<int, int>{0, 0}
                                                              : noisy_->group_range[i];
            for (int g = gbegin; g < gend; g++) {
                const ChannelGroup& group = noisy_->groups[g];
                if (group.threshold == 0)
                    continue;
                // Geometric gaps between hits inside an equal-probability run.
                for (int c = group.begin;;) {
                    double jump = std::floor(std::log(rng.uniform01()) / group.log1m);
                    if (!(jump < static_cast<double>(group.end - c)))
                        break;
                    c += static_cast<int>(jump);
                    const NoiseChannel& ch = noisy_->channels[c];
                    switch (ch.kind) {
                        case ChannelKind::depolarize1:
                            detail::frame_apply_single(ws.frame, ch.q0, "XYZ"[rng.below(3)]);
                            break;
                        case ChannelKind::depolarize2: {
                            uint64_t term = 1 + rng.below(15);
                            detail::frame_apply_single(ws.frame, ch.q0, "IXYZ"[term >> 2]);
                            detail::frame_apply_single(ws.frame, ch.q1, "IXYZ"[term & 3]);
                            break;
                        }
                        case ChannelKind::x_flip:
                            detail::frame_apply_single(ws.frame, ch.q0, 'X');
                            break;
                        case ChannelKind::measurement_flip:
                            ws.flips.toggle(ch.record);
                            break;
                    }
                    c++;
                }
            }
        }

        // Fair coins at noiselessly random measurements; each mask flips an
        // even number of records inside every detector by construction.
        for (size_t c = 0; c < ref_.coin_records.size(); c++)
            if (rng.coin())
                ws.flips ^= ref_.coin_masks[c];

        size_t words = words_for_bits(circuit_->num_detectors());
        for (size_t w = 0; w < words; w++)
            det_row[w] = 0;
        const auto& detectors = circuit_->detectors;
        for (size_t k = 0; k < detectors.size(); k++) {
            bool parity = false;
            for (int m : detectors[k].measurement_indices)
                parity ^= ws.flips.get(m);
            if (parity)
                det_row[k >> 6] |= uint64_t{1} << (k & 63);
        }
        observable = false;
        for (int m : circuit_->observable.measurement_indices)
            observable ^= ws.flips.get(m);
    }

    /// Symptom of a deterministic fault injected after an instruction, via
    /// the same propagation kernel the sampler uses.
    std::pair<std::vector<uint32_t>, bool> single_fault_symptom(size_t instr_index, const SparsePauli& fault) const {
        PauliString frame(circuit_->num_qubits());
        if (fault.qubit1 >= 0)
            detail::frame_apply_single(frame, fault.qubit1, fault.pauli1);
        if (fault.qubit2 >= 0)
            detail::frame_apply_single(frame, fault.qubit2, fault.pauli2);
        BitVec flips = propagate_frame(*circuit_, std::move(frame), instr_index + 1);
        return symptom_from_flips(flips);
    }

    /// Symptom of a classical flip of one measurement record.
    std::pair<std::vector<uint32_t>, bool> record_flip_symptom(int record) const {
        BitVec flips(circuit_->num_measurements());
        flips.set(record, true);
        return symptom_from_flips(flips);
    }

    std::pair<std::vector<uint32_t>, bool> symptom_from_flips(const BitVec& flips) const {
        std::vector<uint32_t> fired;
        const auto& detectors = circuit_->detectors;
        for (size_t k = 0; k < detectors.size(); k++) {
            bool parity = false;
            for (int m : detectors[k].measurement_indices)
                parity ^= flips.get(m);
            if (parity)
                fired.push_back(static_cast<uint32_t>(k));
        }
        bool obs = false;
        for (int m : circuit_->observable.measurement_indices)
            obs ^= flips.get(m);
        return {fired, obs};
    }

   private:
    const NoisyCircuit* noisy_;
    const MemoryCircuit* circuit_;
    CircuitReference ref_;
};

/// Samples detector and observable bits for n_shots shots. The noiseless
/// restriction of the circuit must be detector-deterministic; construction
/// throws otherwise.
inline ShotBatch sample_shots(const NoisyCircuit& noisy, uint64_t n_shots, uint64_t seed, int workers = 1) {
    FrameSampler sampler(noisy);
    ShotBatch batch(n_shots, noisy.base.num_detectors(), seed);
    const size_t words = batch.words_per_shot();

    auto run_range = [&](uint64_t begin, uint64_t end) {
        FrameSampler::Workspace ws = sampler.make_workspace();
        for (uint64_t s = begin; s < end; s++) {
            bool obs = false;
            sampler.sample_shot(seed, s, ws, batch.detector_words.data() + s * words, obs);
            if (obs)
                batch.observable_words[s >> 6] |= uint64_t{1} << (s & 63);
        }
    };

    if (workers <= 1 || n_shots < 128) {
        run_range(0, n_shots);
        return batch;
    }
    // 4096-shot chunks keep observable words worker-private.
    const uint64_t chunk = 4096;
    std::vector<std::thread> threads;
    std::atomic<uint64_t> next_chunk{0};
    uint64_t n_chunks = (n_shots + chunk - 1) / chunk;
    for (int t = 0; t < workers; t++) {
        threads.emplace_back([&] {
            for (;;) {
                uint64_t c = next_chunk.fetch_add(1);
                if (c >= n_chunks)
                    return;
                run_range(c * chunk, std::min(n_shots, (c + 1) * chunk));
            }
        });
    }
    for (auto& th : threads)
        th.join();
    return batch;
}

}  // namespace dextra

#endif
