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

#ifndef DEXTRA_CIRCUIT_HPP
#define DEXTRA_CIRCUIT_HPP

#include <array>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dextra/patch.hpp"
#include "dextra/pauli.hpp"

namespace dextra {

enum class Op : uint8_t {
    prep,           // noiseless projective preparation of the logical state (data qubits)
    reset,          // reset listed qubits to |0>
    hadamard,       // H on listed qubits
    cx,             // qubit list holds (control, target) pairs
    measure,        // Z-basis measurement of listed qubits, one record each
    idle,           // idle marker for noise attachment
    final_measure,  // noiseless logical readout, see MeasureBasis
};

enum class PrepState : uint8_t { Zp, Zm, Xp, Xm, Yp, Ym };
enum class MeasureBasis : uint8_t { Z, X, Y };

inline const char* prep_state_name(PrepState s) {
    switch (s) {
        case PrepState::Zp: return "Z+";
        case PrepState::Zm: return "Z-";
        case PrepState::Xp: return "X+";
        case PrepState::Xm: return "X-";
        case PrepState::Yp: return "Y+";
        case PrepState::Ym: return "Y-";
    }
    return "?";
}

inline const char* measure_basis_name(MeasureBasis b) {
    switch (b) {
        case MeasureBasis::Z: return "Z";
        case MeasureBasis::X: return "X";
        case MeasureBasis::Y: return "Y";
    }
    return "?";
}

inline PrepState prep_state_from_name(const std::string& s) {
    for (PrepState p : {PrepState::Zp, PrepState::Zm, PrepState::Xp, PrepState::Xm, PrepState::Yp, PrepState::Ym})
        if (s == prep_state_name(p))
            return p;
    throw std::invalid_argument("unknown preparation state '" + s + "'");
}

inline MeasureBasis measure_basis_from_name(const std::string& s) {
    for (MeasureBasis b : {MeasureBasis::Z, MeasureBasis::X, MeasureBasis::Y})
        if (s == measure_basis_name(b))
            return b;
    throw std::invalid_argument("unknown measurement basis '" + s + "'");
}

/// Basis whose + eigenstate is prepared by `s`.
inline MeasureBasis basis_of(PrepState s) {
    switch (s) {
        case PrepState::Zp:
        case PrepState::Zm:
            return MeasureBasis::Z;
        case PrepState::Xp:
        case PrepState::Xm:
            return MeasureBasis::X;
        default:
            return MeasureBasis::Y;
    }
}

inline PrepState plus_eigenstate(MeasureBasis b) {
    switch (b) {
        case MeasureBasis::Z: return PrepState::Zp;
        case MeasureBasis::X: return PrepState::Xp;
        case MeasureBasis::Y: return PrepState::Yp;
    }
    throw std::invalid_argument("bad basis");
}

inline bool is_minus_eigenstate(PrepState s) {
    return s == PrepState::Zm || s == PrepState::Xm || s == PrepState::Ym;
}

struct Instruction {
    Op op;
    std::vector<int> qubits;
    int8_t arg = 0;                    // PrepState for prep, MeasureBasis for final_measure
    bool measure_reset_layer = false;  // for idle: sits in a measure/reset layer
    int first_record = -1;             // for measure / final_measure
};

/// One entry per measurement record: the Pauli observable whose eigenvalue
/// the record reports. Single-qubit kinds avoid touching the dense product.
struct MeasuredOp {
    char kind;         // 'Z', 'X', 'Y' single qubit, or 'P' for a product
    int qubit = -1;
    PauliString product;  // populated for kind == 'P'
};

struct DetectorDef {
    std::vector<int> measurement_indices;
};

struct ObservableDef {
    std::vector<int> measurement_indices;
};

struct MemoryCircuit {
    SurfaceCodePatch patch;
    PrepState prep_basis = PrepState::Zp;
    MeasureBasis measure_basis = MeasureBasis::Z;
    int rounds = 0;
    std::vector<Instruction> instructions;
    std::vector<MeasuredOp> measured_ops;  // indexed by measurement record
    std::vector<DetectorDef> detectors;
    ObservableDef observable;

    int num_qubits() const {
        return patch.num_qubits();
    }
    int num_measurements() const {
        return static_cast<int>(measured_ops.size());
    }
    int num_detectors() const {
        return static_cast<int>(detectors.size());
    }
};

namespace detail {

// Syndrome extraction order, one data-qubit offset per CX layer. The pair
// is chosen so that midway ancilla faults hook X-X pairs horizontally and
// Z-Z pairs vertically, parallel to the logical operator they could flip.
inline constexpr std::array<Coord, 4> x_cx_order{{{1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
inline constexpr std::array<Coord, 4> z_cx_order{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

inline int data_index_at(const SurfaceCodePatch& patch, Coord c) {
    if (c.x < 1 || c.y < 1 || c.x > 2 * patch.distance - 1 || c.y > 2 * patch.distance - 1)
        return -1;
    if (c.x % 2 == 0 || c.y % 2 == 0)
        return -1;
    int i = (c.x - 1) / 2;
    int j = (c.y - 1) / 2;
    return j * patch.distance + i;
}

}  // namespace detail

/// Builds the memory-experiment circuit: noiseless projective preparation,
/// rounds_factor*d syndrome extraction rounds, noiseless logical readout.
///
/// Z- and X-basis readout measures every data qubit transversally and
/// terminates the matching-type detector chains against those records. The
/// Y basis has no transversal readout; it instead measures every stabilizer
/// and the logical Y as noiseless Pauli products, which terminates both
/// detector families.
inline MemoryCircuit build_memory_circuit(
    const SurfaceCodePatch& patch, PrepState prep, MeasureBasis measure_basis, int rounds_factor = 3) {
    if (rounds_factor < 1)
        throw std::invalid_argument("build_memory_circuit: rounds_factor must be >= 1");

    MemoryCircuit circuit;
    circuit.patch = patch;
    circuit.prep_basis = prep;
    circuit.measure_basis = measure_basis;
    circuit.rounds = rounds_factor * patch.distance;

    const int n_data = patch.num_data();
    const int n_stab = patch.num_stabilizers();
    const int n_qubits = patch.num_qubits();

    std::vector<int> all_data(n_data);
    for (int q = 0; q < n_data; q++)
        all_data[q] = q;
    std::vector<int> all_ancilla(n_stab);
    std::vector<int> x_ancilla;
    for (int k = 0; k < n_stab; k++) {
        all_ancilla[k] = patch.ancilla_qubit(k);
        if (patch.plaquettes[k].type == StabilizerType::X)
            x_ancilla.push_back(patch.ancilla_qubit(k));
    }

    auto push_idle = [&](const std::vector<bool>& busy, bool measure_reset) {
        Instruction idle;
        idle.op = Op::idle;
        idle.measure_reset_layer = measure_reset;
        for (int q = 0; q < n_qubits; q++)
            if (!busy[q])
                idle.qubits.push_back(q);
        if (!idle.qubits.empty())
            circuit.instructions.push_back(std::move(idle));
    };

    Instruction prep_instr;
    prep_instr.op = Op::prep;
    prep_instr.qubits = all_data;
    prep_instr.arg = static_cast<int8_t>(prep);
    circuit.instructions.push_back(std::move(prep_instr));

    for (int round = 0; round < circuit.rounds; round++) {
        // Ancilla reset layer. Measurement and the following reset share
        // one physical slot, so the data-qubit idle for that slot is
        // charged once, at the measurement layer.
        {
            Instruction r{Op::reset, all_ancilla};
            circuit.instructions.push_back(std::move(r));
        }
        // Hadamards on X ancillas.
        auto push_h_layer = [&] {
            Instruction h{Op::hadamard, x_ancilla};
            circuit.instructions.push_back(std::move(h));
            std::vector<bool> busy(n_qubits, false);
            for (int q : x_ancilla)
                busy[q] = true;
            push_idle(busy, false);
        };
        push_h_layer();
        // Four CX layers following the fixed schedule.
        for (int step = 0; step < 4; step++) {
            Instruction cx{Op::cx, {}};
            std::vector<bool> busy(n_qubits, false);
            for (int k = 0; k < n_stab; k++) {
                const Plaquette& p = patch.plaquettes[k];
                Coord offset = p.type == StabilizerType::X ? detail::x_cx_order[step] : detail::z_cx_order[step];
                int dq = detail::data_index_at(patch, {p.center.x + offset.x, p.center.y + offset.y});
                if (dq < 0)
                    continue;
                int aq = patch.ancilla_qubit(k);
                if (p.type == StabilizerType::X) {
                    cx.qubits.push_back(aq);
                    cx.qubits.push_back(dq);
                } else {
                    cx.qubits.push_back(dq);
                    cx.qubits.push_back(aq);
                }
                busy[aq] = true;
                busy[dq] = true;
            }
            circuit.instructions.push_back(std::move(cx));
            push_idle(busy, false);
        }
        push_h_layer();
        // Ancilla measurement layer.
        {
            Instruction m{Op::measure, all_ancilla};
            m.first_record = circuit.num_measurements();
            for (int q : all_ancilla)
                circuit.measured_ops.push_back({'Z', q, {}});
            circuit.instructions.push_back(std::move(m));
            std::vector<bool> busy(n_qubits, false);
            for (int q : all_ancilla)
                busy[q] = true;
            push_idle(busy, true);
        }
    }

    // Noiseless readout.
    Instruction fin;
    fin.op = Op::final_measure;
    fin.arg = static_cast<int8_t>(measure_basis);
    fin.first_record = circuit.num_measurements();
    const int final_base = fin.first_record;
    if (measure_basis == MeasureBasis::Z || measure_basis == MeasureBasis::X) {
        char kind = measure_basis == MeasureBasis::Z ? 'Z' : 'X';
        fin.qubits = all_data;
        for (int q : all_data)
            circuit.measured_ops.push_back({kind, q, {}});
    } else {
        fin.qubits = all_data;
        for (int k = 0; k < n_stab; k++) {
            MeasuredOp op{'P', -1, PauliString(n_qubits)};
            char pc = patch.plaquettes[k].type == StabilizerType::X ? 'X' : 'Z';
            for (int q : patch.plaquettes[k].support)
                op.product.set_pauli(q, pc);
            circuit.measured_ops.push_back(std::move(op));
        }
        MeasuredOp logical{'P', -1, PauliString(n_qubits)};
        for (int q : patch.logical_x)
            logical.product.x.set(q, true);
        for (int q : patch.logical_z)
            logical.product.z.set(q, true);
        circuit.measured_ops.push_back(std::move(logical));
    }
    circuit.instructions.push_back(std::move(fin));

    // Detectors: first round against the canonicalized preparation signs,
    // then consecutive-round comparisons, then the readout boundary.
    auto record_of = [&](int plaquette, int round) { return round * n_stab + plaquette; };
    for (int k = 0; k < n_stab; k++)
        circuit.detectors.push_back({{record_of(k, 0)}});
    for (int round = 1; round < circuit.rounds; round++)
        for (int k = 0; k < n_stab; k++)
            circuit.detectors.push_back({{record_of(k, round - 1), record_of(k, round)}});
    if (measure_basis == MeasureBasis::Y) {
        for (int k = 0; k < n_stab; k++)
            circuit.detectors.push_back({{record_of(k, circuit.rounds - 1), final_base + k}});
        circuit.observable.measurement_indices = {final_base + n_stab};
    } else {
        StabilizerType match = measure_basis == MeasureBasis::Z ? StabilizerType::Z : StabilizerType::X;
        for (int k = 0; k < n_stab; k++) {
            if (patch.plaquettes[k].type != match)
                continue;
            DetectorDef det;
            det.measurement_indices.push_back(record_of(k, circuit.rounds - 1));
            for (int q : patch.plaquettes[k].support)
                det.measurement_indices.push_back(final_base + q);
            circuit.detectors.push_back(std::move(det));
        }
        const auto& chain = measure_basis == MeasureBasis::Z ? patch.logical_z : patch.logical_x;
        for (int q : chain)
            circuit.observable.measurement_indices.push_back(final_base + q);
    }

    return circuit;
}

/// Line-oriented debug serialization: one instruction per line, detector
/// and observable annotations at the end.
inline std::string circuit_to_text(const MemoryCircuit& circuit) {
    std::ostringstream out;
    out << "qubits " << circuit.num_qubits() << "\n";
    out << "rounds " << circuit.rounds << "\n";
    for (const auto& instr : circuit.instructions) {
        switch (instr.op) {
            case Op::prep:
                out << "PREP " << prep_state_name(static_cast<PrepState>(instr.arg));
                break;
            case Op::reset:
                out << "R";
                break;
            case Op::hadamard:
                out << "H";
                break;
            case Op::cx:
                out << "CX";
                break;
            case Op::measure:
                out << "M";
                break;
            case Op::idle:
                out << (instr.measure_reset_layer ? "IDLE_MR" : "IDLE");
                break;
            case Op::final_measure:
                out << "MFINAL " << measure_basis_name(static_cast<MeasureBasis>(instr.arg));
                break;
        }
        if (instr.op != Op::prep && instr.op != Op::final_measure)
            for (int q : instr.qubits)
                out << " " << q;
        out << "\n";
    }
    for (const auto& det : circuit.detectors) {
        out << "DETECTOR";
        for (int m : det.measurement_indices)
            out << " " << m;
        out << "\n";
    }
    out << "OBSERVABLE";
    for (int m : circuit.observable.measurement_indices)
        out << " " << m;
    out << "\n";
    return out.str();
}

}  // namespace dextra

#endif
