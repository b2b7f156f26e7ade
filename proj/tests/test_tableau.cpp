#include <catch2/catch.hpp>

#include <cmath>

#include "dextra/tableau.hpp"

using namespace dextra;

namespace {

PauliString single(int n, int q, char p) {
    PauliString s(n);
    s.set_pauli(q, p);
    return s;
}

}  // namespace

TEST_CASE("tableau basics: computational basis and Hadamard") {
    StabilizerTableau t(2);
    Xoshiro256 rng(1, 0);

    // |00>: Z measurements deterministic 0, X measurement random.
    auto m = t.measure(single(2, 0, 'Z'), rng);
    CHECK(m.deterministic);
    CHECK_FALSE(m.outcome);

    t.h(0);
    m = t.measure(single(2, 0, 'X'), rng);
    CHECK(m.deterministic);
    CHECK_FALSE(m.outcome);
    m = t.measure(single(2, 0, 'Z'), rng);
    CHECK_FALSE(m.deterministic);
}

TEST_CASE("tableau Bell pair correlations") {
    int ones = 0;
    for (uint64_t s = 0; s < 64; s++) {
        StabilizerTableau t(2);
        Xoshiro256 rng(7, s);
        t.h(0);
        t.cx(0, 1);
        auto m0 = t.measure(single(2, 0, 'Z'), rng);
        auto m1 = t.measure(single(2, 1, 'Z'), rng);
        CHECK_FALSE(m0.deterministic);
        CHECK(m1.deterministic);
        CHECK(m0.outcome == m1.outcome);
        ones += m0.outcome;
        // XX is a stabilizer of the Bell state.
        auto mxx = t.measure(
            [] {
                PauliString p(2);
                p.set_pauli(0, 'X');
                p.set_pauli(1, 'X');
                return p;
            }(),
            rng);
        // After collapsing both qubits in Z, XX is random again.
        CHECK_FALSE(mxx.deterministic);
    }
    CHECK(ones > 10);
    CHECK(ones < 54);
}

TEST_CASE("tableau Y eigenstate via forced product measurement") {
    StabilizerTableau t(1);
    Xoshiro256 rng(3, 0);
    auto m = t.measure(single(1, 0, 'Y'), rng, 0);
    CHECK_FALSE(m.deterministic);
    m = t.measure(single(1, 0, 'Y'), rng);
    CHECK(m.deterministic);
    CHECK_FALSE(m.outcome);  // +1 eigenstate of Y
}

TEST_CASE("canonical prep pins stabilizers and logical sign") {
    for (PrepState state :
         {PrepState::Zp, PrepState::Zm, PrepState::Xp, PrepState::Xm, PrepState::Yp, PrepState::Ym}) {
        CAPTURE(prep_state_name(state));
        SurfaceCodePatch patch = build_patch(3);
        StabilizerTableau t(patch.num_qubits());
        canonical_prep(t, patch, state);
        Xoshiro256 rng(11, 0);
        for (int k = 0; k < patch.num_stabilizers(); k++) {
            auto m = t.measure(detail::stabilizer_product(patch, k), rng);
            CHECK(m.deterministic);
            CHECK_FALSE(m.outcome);
        }
        auto m = t.measure(detail::logical_product(patch, basis_of(state)), rng);
        CHECK(m.deterministic);
        CHECK(m.outcome == is_minus_eigenstate(state));
    }
}

TEST_CASE("validate_determinism holds for every basis pair at d=3 and d=4") {
    for (int d : {3, 4}) {
        SurfaceCodePatch patch = build_patch(d);
        for (PrepState prep :
             {PrepState::Zp, PrepState::Zm, PrepState::Xp, PrepState::Xm, PrepState::Yp, PrepState::Ym}) {
            for (MeasureBasis basis : {MeasureBasis::Z, MeasureBasis::X, MeasureBasis::Y}) {
                CAPTURE(d, prep_state_name(prep), measure_basis_name(basis));
                MemoryCircuit circuit = build_memory_circuit(patch, prep, basis, 1);
                CHECK(validate_determinism(circuit, 16, 5));
            }
        }
    }
}

TEST_CASE("validate_determinism fails for a corrupted detector") {
    SurfaceCodePatch patch = build_patch(3);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 1);
    // Drop one record from a readout detector; its parity becomes the raw
    // stabilizer record, which is no longer deterministic relative to prep.
    REQUIRE(circuit.detectors.back().measurement_indices.size() > 1);
    circuit.detectors.back().measurement_indices.pop_back();
    CHECK_FALSE(validate_determinism(circuit, 64, 5));
}

TEST_CASE("cross-basis readout is noiselessly random") {
    SurfaceCodePatch patch = build_patch(3);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::X, 1);
    NoisyCircuit noiseless;
    noiseless.base = circuit;
    noiseless.channel_range.assign(circuit.instructions.size(), {0, 0});
    uint64_t n = 2000;
    ShotBatch batch = tableau_simulate(noiseless, n, 42);
    uint64_t ones = 0;
    for (uint64_t s = 0; s < n; s++) {
        ones += batch.observable(s);
        for (uint32_t k = 0; k < batch.n_detectors; k++)
            REQUIRE_FALSE(batch.detector(s, k));
    }
    double f = static_cast<double>(ones) / static_cast<double>(n);
    // 3 sigma around 1/2.
    CHECK(std::abs(f - 0.5) < 3.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST_CASE("same-basis noiseless readout is the prepared eigenvalue") {
    SurfaceCodePatch patch = build_patch(3);
    for (auto [prep, basis, expected] : {std::tuple{PrepState::Zp, MeasureBasis::Z, false},
                                         std::tuple{PrepState::Zm, MeasureBasis::Z, true},
                                         std::tuple{PrepState::Yp, MeasureBasis::Y, false},
                                         std::tuple{PrepState::Ym, MeasureBasis::Y, true}}) {
        MemoryCircuit circuit = build_memory_circuit(patch, prep, basis, 1);
        NoisyCircuit noiseless;
        noiseless.base = circuit;
        noiseless.channel_range.assign(circuit.instructions.size(), {0, 0});
        ShotBatch batch = tableau_simulate(noiseless, 64, 9);
        TableauReference ref = reference_run(circuit);
        bool obs_ref = false;
        for (int m : circuit.observable.measurement_indices)
            obs_ref ^= ref.ref_outcome.get(m);
        CHECK(obs_ref == expected);
        for (uint64_t s = 0; s < 64; s++)
            CHECK_FALSE(batch.observable(s));  // flips relative to reference
    }
}

TEST_CASE("d=5 Y-basis memory: 15 rounds, deterministic, +1 readout") {
    SurfaceCodePatch patch = build_patch(5);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Yp, MeasureBasis::Y, 3);
    CHECK(circuit.rounds == 15);
    TableauReference ref = reference_run(circuit);
    bool obs_parity = false;
    for (int m : circuit.observable.measurement_indices)
        obs_parity ^= ref.ref_outcome.get(m);
    CHECK_FALSE(obs_parity);  // +1 eigenvalue
    CHECK(validate_determinism(circuit, 8, 2));
}
