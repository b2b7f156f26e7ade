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

#ifndef DEXTRA_TABLEAU_HPP
#define DEXTRA_TABLEAU_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dextra/circuit.hpp"
#include "dextra/noise.hpp"
#include "dextra/pauli.hpp"
#include "dextra/rng.hpp"
#include "dextra/shots.hpp"

namespace dextra {

struct MeasureOutcome {
    bool outcome;
    bool deterministic;
    int collapse_row = -1;  // stabilizer row replaced in the random case
};

/// Aaronson-Gottesman stabilizer tableau with destabilizers and generic
/// Pauli-product measurement. Rows 0..n-1 hold destabilizers, n..2n-1
/// stabilizers, row 2n is scratch.
class StabilizerTableau {
   public:
    explicit StabilizerTableau(int n)
        : n_(n), words_(words_for_bits(static_cast<size_t>(n))), xs_((2 * n + 1) * words_, 0),
          zs_((2 * n + 1) * words_, 0), r_(2 * n + 1, 0), scratch_pauli_(n) {
        reset_identity();
    }

    int num_qubits() const {
        return n_;
    }

    void reset_identity() {
        std::fill(xs_.begin(), xs_.end(), 0);
        std::fill(zs_.begin(), zs_.end(), 0);
        std::fill(r_.begin(), r_.end(), 0);
        for (int i = 0; i < n_; i++) {
            set_bit(xs_, i, i);
            set_bit(zs_, n_ + i, i);
        }
    }

    void h(int q) {
        size_t w = static_cast<size_t>(q) >> 6;
        int s = q & 63;
        uint64_t mask = uint64_t{1} << s;
        for (int row = 0; row < 2 * n_; row++) {
            uint64_t& xw = xs_[row * words_ + w];
            uint64_t& zw = zs_[row * words_ + w];
            r_[row] ^= static_cast<uint8_t>(((xw & zw) >> s) & 1);
            uint64_t diff = (xw ^ zw) & mask;
            xw ^= diff;
            zw ^= diff;
        }
    }

    void cx(int c, int t) {
        size_t wc = static_cast<size_t>(c) >> 6, wt = static_cast<size_t>(t) >> 6;
        int sc = c & 63, st = t & 63;
        for (int row = 0; row < 2 * n_; row++) {
            uint64_t xc = (xs_[row * words_ + wc] >> sc) & 1;
            uint64_t zt = (zs_[row * words_ + wt] >> st) & 1;
            uint64_t xt = (xs_[row * words_ + wt] >> st) & 1;
            uint64_t zc = (zs_[row * words_ + wc] >> sc) & 1;
            r_[row] ^= static_cast<uint8_t>(xc & zt & (xt ^ zc ^ 1));
            xs_[row * words_ + wt] ^= xc << st;
            zs_[row * words_ + wc] ^= zt << sc;
        }
    }

    void apply_single_pauli(int q, char p) {
        if (p == 'I')
            return;
        size_t w = static_cast<size_t>(q) >> 6;
        int s = q & 63;
        for (int row = 0; row < 2 * n_; row++) {
            uint64_t xb = (xs_[row * words_ + w] >> s) & 1;
            uint64_t zb = (zs_[row * words_ + w] >> s) & 1;
            uint64_t anti = p == 'X' ? zb : (p == 'Z' ? xb : xb ^ zb);
            r_[row] ^= static_cast<uint8_t>(anti);
        }
    }

    void apply_pauli(const PauliString& p) {
        for (int row = 0; row < 2 * n_; row++)
            if (row_anticommutes(row, p))
                r_[row] ^= 1;
    }

    bool row_anticommutes(int row, const PauliString& p) const {
        uint64_t acc = 0;
        const uint64_t* rx = xs_.data() + row * words_;
        const uint64_t* rz = zs_.data() + row * words_;
        const auto& px = p.x.words();
        const auto& pz = p.z.words();
        for (size_t k = 0; k < words_; k++)
            acc ^= (rx[k] & pz[k]) ^ (rz[k] & px[k]);
        return std::popcount(acc) & 1;
    }

    /// Measures the Hermitian Pauli product p. When the outcome is random,
    /// `forced` (if non-negative) fixes the projected branch instead of the
    /// coin; the collapse row's old stabilizer lands in its destabilizer
    /// slot, where callers can read the branch randomizer.
    MeasureOutcome measure(const PauliString& p, Xoshiro256& rng, int forced = -1) {
        int pivot = -1;
        for (int row = n_; row < 2 * n_; row++) {
            if (row_anticommutes(row, p)) {
                pivot = row;
                break;
            }
        }
        if (pivot >= 0) {
            // Park the old stabilizer in the destabilizer slot first; every
            // remaining anticommuting row is multiplied by that copy, so all
            // rowsum products stay real.
            int dslot = pivot - n_;
            copy_row(dslot, pivot);
            bool outcome = forced >= 0 ? forced != 0 : rng.coin();
            write_row(pivot, p, outcome);
            for (int row = 0; row < 2 * n_; row++)
                if (row != dslot && row != pivot && row_anticommutes(row, p))
                    rowsum(row, dslot);
            return {outcome, false, pivot};
        }
        // Deterministic: accumulate the stabilizer-span decomposition in the
        // scratch row; the destabilizer that anticommutes with p flags each
        // contributing generator.
        int scratch = 2 * n_;
        zero_row(scratch);
        for (int i = 0; i < n_; i++)
            if (row_anticommutes(i, p))
                rowsum(scratch, n_ + i);
        for (size_t k = 0; k < words_; k++)
            if (xs_[scratch * words_ + k] != p.x.words()[k] || zs_[scratch * words_ + k] != p.z.words()[k])
                throw std::logic_error("tableau: deterministic measurement did not reduce to the measured operator");
        return {r_[scratch] != 0, true, -1};
    }

    void reset_qubit(int q, Xoshiro256& rng) {
        scratch_pauli_.x.clear();
        scratch_pauli_.z.clear();
        scratch_pauli_.z.set(q, true);
        MeasureOutcome m = measure(scratch_pauli_, rng);
        if (m.outcome)
            apply_single_pauli(q, 'X');
    }

    PauliString destabilizer(int stab_row) const {
        PauliString out(n_);
        int row = stab_row - n_;
        for (size_t k = 0; k < words_; k++) {
            out.x.words()[k] = xs_[row * words_ + k];
            out.z.words()[k] = zs_[row * words_ + k];
        }
        return out;
    }

    PauliString& scratch_pauli() {
        return scratch_pauli_;
    }

   private:
    void set_bit(std::vector<uint64_t>& m, int row, int q) {
        m[row * words_ + (q >> 6)] |= uint64_t{1} << (q & 63);
    }

    void zero_row(int row) {
        for (size_t k = 0; k < words_; k++) {
            xs_[row * words_ + k] = 0;
            zs_[row * words_ + k] = 0;
        }
        r_[row] = 0;
    }

    void copy_row(int dst, int src) {
        for (size_t k = 0; k < words_; k++) {
            xs_[dst * words_ + k] = xs_[src * words_ + k];
            zs_[dst * words_ + k] = zs_[src * words_ + k];
        }
        r_[dst] = r_[src];
    }

    void write_row(int row, const PauliString& p, bool sign) {
        for (size_t k = 0; k < words_; k++) {
            xs_[row * words_ + k] = p.x.words()[k];
            zs_[row * words_ + k] = p.z.words()[k];
        }
        r_[row] = sign ? 1 : 0;
    }

    // row_h *= row_i, with Aaronson-Gottesman phase bookkeeping.
    void rowsum(int h, int i) {
        int plus = 0, minus = 0;
        for (size_t k = 0; k < words_; k++) {
            uint64_t x1 = xs_[i * words_ + k], z1 = zs_[i * words_ + k];
            uint64_t x2 = xs_[h * words_ + k], z2 = zs_[h * words_ + k];
            uint64_t only_x = x1 & ~z1, both = x1 & z1, only_z = ~x1 & z1;
            uint64_t plus_mask = (only_x & z2 & x2) | (both & z2 & ~x2) | (only_z & x2 & ~z2);
            uint64_t minus_mask = (only_x & z2 & ~x2) | (both & x2 & ~z2) | (only_z & x2 & z2);
            plus += std::popcount(plus_mask);
            minus += std::popcount(minus_mask);
        }
        int phase = (2 * r_[h] + 2 * r_[i] + plus - minus) & 3;
        if (phase & 1)
            throw std::logic_error("tableau: rowsum produced imaginary phase");
        r_[h] = static_cast<uint8_t>(phase >> 1);
        for (size_t k = 0; k < words_; k++) {
            xs_[h * words_ + k] ^= xs_[i * words_ + k];
            zs_[h * words_ + k] ^= zs_[i * words_ + k];
        }
    }

    int n_;
    size_t words_;
    std::vector<uint64_t> xs_, zs_;
    std::vector<uint8_t> r_;
    PauliString scratch_pauli_;
};

namespace detail {

inline PauliString stabilizer_product(const SurfaceCodePatch& patch, int k) {
    PauliString p(patch.num_qubits());
    char letter = patch.plaquettes[k].type == StabilizerType::X ? 'X' : 'Z';
    for (int q : patch.plaquettes[k].support)
        p.set_pauli(q, letter);
    return p;
}

inline PauliString logical_product(const SurfaceCodePatch& patch, MeasureBasis basis) {
    PauliString p(patch.num_qubits());
    if (basis == MeasureBasis::Z || basis == MeasureBasis::Y)
        for (int q : patch.logical_z)
            p.z.set(q, true);
    if (basis == MeasureBasis::X || basis == MeasureBasis::Y)
        for (int q : patch.logical_x)
            p.x.set(q, true);
    return p;
}

inline PauliString measured_op_product(const MeasuredOp& op, int n_qubits) {
    if (op.kind == 'P')
        return op.product;
    PauliString p(n_qubits);
    p.set_pauli(op.qubit, op.kind);
    return p;
}

}  // namespace detail

/// Projective canonical preparation: measure every stabilizer and the
/// target logical on |0...0>, forcing each projection to the +1 sign, then
/// apply the conjugate logical for -1 eigenstates.
inline void canonical_prep(StabilizerTableau& tableau, const SurfaceCodePatch& patch, PrepState state) {
    Xoshiro256 unused_rng;
    for (int k = 0; k < patch.num_stabilizers(); k++) {
        PauliString p = detail::stabilizer_product(patch, k);
        MeasureOutcome m = tableau.measure(p, unused_rng, 0);
        if (m.deterministic && m.outcome)
            throw std::logic_error("canonical_prep: deterministic stabilizer projected to -1");
    }
    MeasureBasis basis = basis_of(state);
    PauliString logical = detail::logical_product(patch, basis);
    MeasureOutcome m = tableau.measure(logical, unused_rng, 0);
    if (m.deterministic && m.outcome)
        throw std::logic_error("canonical_prep: deterministic logical projected to -1");
    if (is_minus_eigenstate(state)) {
        MeasureBasis conj = basis == MeasureBasis::Z ? MeasureBasis::X : MeasureBasis::Z;
        tableau.apply_pauli(detail::logical_product(patch, conj));
    }
}

/// Noiseless reference run: per-record determinism flags, reference
/// outcomes (random branches forced to 0), and the branch randomizer Pauli
/// for every noiselessly random measurement.
struct TableauReference {
    BitVec is_deterministic;
    BitVec ref_outcome;
    std::vector<int> randomizer_index;   // per record, -1 when deterministic
    std::vector<PauliString> randomizers;
};

inline TableauReference reference_run(const MemoryCircuit& circuit) {
    const int n = circuit.num_qubits();
    StabilizerTableau tableau(n);
    Xoshiro256 rng;
    TableauReference ref;
    int n_records = circuit.num_measurements();
    ref.is_deterministic = BitVec(n_records);
    ref.ref_outcome = BitVec(n_records);
    ref.randomizer_index.assign(n_records, -1);

    auto do_measure = [&](int record, const PauliString& p) {
        MeasureOutcome m = tableau.measure(p, rng, 0);
        ref.is_deterministic.set(record, m.deterministic);
        ref.ref_outcome.set(record, m.outcome);
        if (!m.deterministic) {
            ref.randomizer_index[record] = static_cast<int>(ref.randomizers.size());
            ref.randomizers.push_back(tableau.destabilizer(m.collapse_row));
        }
    };

    for (const Instruction& instr : circuit.instructions) {
        switch (instr.op) {
            case Op::prep:
                canonical_prep(tableau, circuit.patch, static_cast<PrepState>(instr.arg));
                break;
            case Op::reset:
                for (int q : instr.qubits)
                    tableau.reset_qubit(q, rng);
                break;
            case Op::hadamard:
                for (int q : instr.qubits)
                    tableau.h(q);
                break;
            case Op::cx:
                for (size_t k = 0; k + 1 < instr.qubits.size(); k += 2)
                    tableau.cx(instr.qubits[k], instr.qubits[k + 1]);
                break;
            case Op::measure:
            case Op::final_measure: {
                int record = instr.first_record;
                int count = instr.op == Op::measure ? static_cast<int>(instr.qubits.size())
                                                    : circuit.num_measurements() - record;
                for (int k = 0; k < count; k++)
                    do_measure(record + k, detail::measured_op_product(circuit.measured_ops[record + k], n));
                break;
            }
            case Op::idle:
                break;
        }
    }

    // Detectors must reference an even set of reference outcomes.
    for (const auto& det : circuit.detectors) {
        bool parity = false;
        for (int m : det.measurement_indices)
            parity ^= ref.ref_outcome.get(m);
        if (parity)
            throw std::logic_error("reference_run: detector has nonzero noiseless parity");
    }
    return ref;
}

/// Full stabilizer simulation of a noisy circuit; the slow correctness
/// oracle for the frame sampler. Guarded by max_qubits since the tableau
/// cost grows quadratically.
inline ShotBatch tableau_simulate(
    const NoisyCircuit& noisy, uint64_t n_shots, uint64_t seed, int max_qubits = 128) {
    const MemoryCircuit& circuit = noisy.base;
    const int n = circuit.num_qubits();
    if (n > max_qubits)
        throw std::invalid_argument("tableau_simulate: circuit exceeds max_qubits resource guard");

    TableauReference ref = reference_run(circuit);
    bool obs_ref_parity = false;
    for (int m : circuit.observable.measurement_indices)
        obs_ref_parity ^= ref.ref_outcome.get(m);

    ShotBatch batch(n_shots, circuit.num_detectors(), seed);
    std::vector<uint8_t> records(circuit.num_measurements());
    StabilizerTableau tableau(n);
    const char* depol1 = "XYZ";

    for (uint64_t shot = 0; shot < n_shots; shot++) {
        Xoshiro256 rng(seed, shot);
        tableau.reset_identity();
        std::fill(records.begin(), records.end(), 0);

        for (size_t i = 0; i < circuit.instructions.size(); i++) {
            const Instruction& instr = circuit.instructions[i];
            switch (instr.op) {
                case Op::prep:
                    canonical_prep(tableau, circuit.patch, static_cast<PrepState>(instr.arg));
                    break;
                case Op::reset:
                    for (int q : instr.qubits)
                        tableau.reset_qubit(q, rng);
                    break;
                case Op::hadamard:
                    for (int q : instr.qubits)
                        tableau.h(q);
                    break;
                case Op::cx:
                    for (size_t k = 0; k + 1 < instr.qubits.size(); k += 2)
                        tableau.cx(instr.qubits[k], instr.qubits[k + 1]);
                    break;
                case Op::measure:
                    for (size_t k = 0; k < instr.qubits.size(); k++) {
                        PauliString& p = tableau.scratch_pauli();
                        p.x.clear();
                        p.z.clear();
                        p.z.set(instr.qubits[k], true);
                        records[instr.first_record + k] = tableau.measure(p, rng).outcome;
                    }
                    break;
                case Op::final_measure: {
                    int record = instr.first_record;
                    int count = circuit.num_measurements() - record;
                    for (int k = 0; k < count; k++) {
                        PauliString p = detail::measured_op_product(circuit.measured_ops[record + k], n);
                        records[record + k] = tableau.measure(p, rng).outcome;
                    }
                    break;
                }
                case Op::idle:
                    break;
            }
            auto [begin, end] = noisy.channel_range.empty()
                                    ? std::pair<int, int>{0, 0}
                                    : noisy.channel_range[i];
            for (int c = begin; c < end; c++) {
                const NoiseChannel& ch = noisy.channels[c];
                if (!rng.bernoulli_threshold(ch.threshold))
                    continue;
                switch (ch.kind) {
                    case ChannelKind::depolarize1:
                        tableau.apply_single_pauli(ch.q0, depol1[rng.below(3)]);
                        break;
                    case ChannelKind::depolarize2: {
                        uint64_t term = 1 + rng.below(15);
                        char p0 = "IXYZ"[term >> 2];
                        char p1 = "IXYZ"[term & 3];
                        tableau.apply_single_pauli(ch.q0, p0);
                        tableau.apply_single_pauli(ch.q1, p1);
                        break;
                    }
                    case ChannelKind::x_flip:
                        tableau.apply_single_pauli(ch.q0, 'X');
                        break;
                    case ChannelKind::measurement_flip:
                        records[ch.record] ^= 1;
                        break;
                }
            }
        }

        for (uint32_t k = 0; k < batch.n_detectors; k++) {
            bool parity = false;
            for (int m : circuit.detectors[k].measurement_indices)
                parity ^= records[m];
            batch.set_detector(shot, k, parity);
        }
        bool obs = obs_ref_parity;
        for (int m : circuit.observable.measurement_indices)
            obs ^= records[m];
        batch.set_observable(shot, obs);
    }
    return batch;
}

/// True iff every detector parity is zero over n_shots noiseless tableau
/// runs with live random branches.
inline bool validate_determinism(const MemoryCircuit& circuit, uint64_t n_shots = 64, uint64_t seed = 1) {
    NoisyCircuit noiseless;
    noiseless.base = circuit;
    noiseless.channel_range.assign(circuit.instructions.size(), {0, 0});
    try {
        ShotBatch batch = tableau_simulate(noiseless, n_shots, seed, 1 << 20);
        for (uint64_t s = 0; s < n_shots; s++)
            for (uint32_t k = 0; k < batch.n_detectors; k++)
                if (batch.detector(s, k))
                    return false;
    } catch (const std::logic_error&) {
        return false;
    }
    return true;
}

}  // namespace dextra

#endif
