#include <catch2/catch.hpp>

#include <sstream>

#include "dextra/circuit.hpp"

using namespace dextra;

TEST_CASE("memory circuit defaults to 3d rounds") {
    SurfaceCodePatch patch = build_patch(5);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z);
    CHECK(circuit.rounds == 15);
    CHECK(build_memory_circuit(patch, PrepState::Yp, MeasureBasis::Y, 3).rounds == 15);
    CHECK_THROWS_AS(build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 0), std::invalid_argument);
}

TEST_CASE("detector and record bookkeeping") {
    SurfaceCodePatch patch = build_patch(3);
    const int n_stab = patch.num_stabilizers();

    for (MeasureBasis basis : {MeasureBasis::Z, MeasureBasis::X, MeasureBasis::Y}) {
        MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, basis, 2);
        int rounds = circuit.rounds;
        CAPTURE(measure_basis_name(basis));
        int expected_final = basis == MeasureBasis::Y ? n_stab : n_stab / 2;
        CHECK(circuit.num_detectors() == n_stab + (rounds - 1) * n_stab + expected_final);
        int expected_records = rounds * n_stab + (basis == MeasureBasis::Y ? n_stab + 1 : patch.num_data());
        CHECK(circuit.num_measurements() == expected_records);
        for (const auto& det : circuit.detectors)
            for (int m : det.measurement_indices)
                CHECK(m < circuit.num_measurements());
        CHECK_FALSE(circuit.observable.measurement_indices.empty());
    }
}

TEST_CASE("gate and measurement layers cover every qubit with a gate or an idle") {
    SurfaceCodePatch patch = build_patch(3);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Xp, MeasureBasis::X, 1);
    const int n = circuit.num_qubits();
    // Walk per layer: each idle marker closes a layer whose gates plus
    // idles must cover all qubits. Reset layers carry no idle marker since
    // measurement and reset share one physical slot.
    std::vector<int> coverage(n, 0);
    int layers = 0;
    for (size_t i = 0; i < circuit.instructions.size(); i++) {
        const Instruction& instr = circuit.instructions[i];
        if (instr.op == Op::prep || instr.op == Op::final_measure || instr.op == Op::reset)
            continue;
        if (instr.op == Op::idle) {
            for (int q : instr.qubits)
                coverage[q]++;
            layers++;
            for (int q = 0; q < n; q++) {
                CHECK(coverage[q] == layers);
            }
        } else {
            for (int q : instr.qubits)
                coverage[q]++;
        }
    }
    CHECK(layers == circuit.rounds * 7);  // 2 H, 4 CX, measure/reset slot
}

TEST_CASE("circuit text serialization shape") {
    SurfaceCodePatch patch = build_patch(2);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 1);
    std::string text = circuit_to_text(circuit);
    std::istringstream in(text);
    std::string line;
    int n_detector_lines = 0, n_observable_lines = 0, n_prep = 0, n_mfinal = 0;
    while (std::getline(in, line)) {
        if (line.rfind("DETECTOR", 0) == 0)
            n_detector_lines++;
        if (line.rfind("OBSERVABLE", 0) == 0)
            n_observable_lines++;
        if (line.rfind("PREP Z+", 0) == 0)
            n_prep++;
        if (line.rfind("MFINAL Z", 0) == 0)
            n_mfinal++;
    }
    CHECK(n_detector_lines == circuit.num_detectors());
    CHECK(n_observable_lines == 1);
    CHECK(n_prep == 1);
    CHECK(n_mfinal == 1);
}

TEST_CASE("prep state names round trip") {
    for (PrepState p : {PrepState::Zp, PrepState::Zm, PrepState::Xp, PrepState::Xm, PrepState::Yp, PrepState::Ym})
        CHECK(prep_state_from_name(prep_state_name(p)) == p);
    for (MeasureBasis b : {MeasureBasis::Z, MeasureBasis::X, MeasureBasis::Y})
        CHECK(measure_basis_from_name(measure_basis_name(b)) == b);
    CHECK_THROWS_AS(prep_state_from_name("Q+"), std::invalid_argument);
}
