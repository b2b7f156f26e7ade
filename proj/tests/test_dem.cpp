#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "dextra/dem.hpp"

using namespace dextra;

namespace {

NoisyCircuit bare(const MemoryCircuit& circuit) {
    NoisyCircuit n;
    n.base = circuit;
    n.channel_range.assign(circuit.instructions.size(), {0, 0});
    return n;
}

// Index of an idle instruction between round `r` and `r+1` (the measure
// layer idle of round r).
size_t idle_after_round(const MemoryCircuit& circuit, int round) {
    int seen_measures = 0;
    for (size_t i = 0; i < circuit.instructions.size(); i++) {
        if (circuit.instructions[i].op == Op::measure) {
            seen_measures++;
            if (seen_measures == round)
                return i + 1;  // idle marker following the measure layer
        }
    }
    FAIL("round not found");
    return 0;
}

}  // namespace

TEST_CASE("p=0 circuit has an empty DEM") {
    MemoryCircuit circuit = build_memory_circuit(build_patch(3), PrepState::Zp, MeasureBasis::Z, 1);
    NoisyCircuit noisy = apply_si1000(circuit, {0.0, 0.0, 0});
    CHECK(extract_dem(noisy).empty());
}

TEST_CASE("single X-flip channel on a bulk data qubit gives one 2-detector mechanism") {
    MemoryCircuit circuit = build_memory_circuit(build_patch(3), PrepState::Zp, MeasureBasis::Z, 3);
    NoisyCircuit noisy = bare(circuit);
    const double q = 0.01;
    size_t loc = idle_after_round(circuit, 2);
    REQUIRE(circuit.instructions[loc].op == Op::idle);
    noisy.channels.push_back({static_cast<int>(loc), ChannelKind::x_flip, q, 4, -1, -1, probability_to_threshold(q)});
    rebuild_channel_ranges(noisy);

    auto mechanisms = extract_dem(noisy);
    REQUIRE(mechanisms.size() == 1);
    CHECK(mechanisms[0].probability == Approx(q).epsilon(1e-12));
    CHECK(mechanisms[0].detectors.size() == 2);
    CHECK_FALSE(mechanisms[0].flips_observable);
    CHECK(mechanisms[0].components.size() == 1);
}

TEST_CASE("two channels with the same symptom merge with the XOR rule") {
    MemoryCircuit circuit = build_memory_circuit(build_patch(3), PrepState::Zp, MeasureBasis::Z, 3);
    NoisyCircuit noisy = bare(circuit);
    const double q = 0.01;
    size_t loc = idle_after_round(circuit, 2);
    for (int rep = 0; rep < 2; rep++)
        noisy.channels.push_back(
            {static_cast<int>(loc), ChannelKind::x_flip, q, 4, -1, -1, probability_to_threshold(q)});
    rebuild_channel_ranges(noisy);

    auto mechanisms = extract_dem(noisy);
    REQUIRE(mechanisms.size() == 1);
    CHECK(mechanisms[0].probability == Approx(2 * q * (1 - q)).epsilon(1e-12));
}

TEST_CASE("extraction is order independent") {
    MemoryCircuit circuit = build_memory_circuit(build_patch(3), PrepState::Zp, MeasureBasis::Z, 2);
    NoisyCircuit noisy = apply_si1000(circuit, {0.004, 0.0, 3});
    auto reference = extract_dem(noisy);

    NoisyCircuit shuffled = noisy;
    std::mt19937 gen(99);
    std::shuffle(shuffled.channels.begin(), shuffled.channels.end(), gen);
    rebuild_channel_ranges(shuffled);
    auto permuted = extract_dem(shuffled);

    REQUIRE(reference.size() == permuted.size());
    for (size_t i = 0; i < reference.size(); i++) {
        CHECK(reference[i].detectors == permuted[i].detectors);
        CHECK(reference[i].flips_observable == permuted[i].flips_observable);
        CHECK(reference[i].probability == Approx(permuted[i].probability).epsilon(1e-12));
    }
}

TEST_CASE("composite mechanisms decompose into graphlike components that XOR back") {
    MemoryCircuit circuit = build_memory_circuit(build_patch(3), PrepState::Zp, MeasureBasis::Z, 3);
    NoisyCircuit noisy = apply_si1000(circuit, {0.002, 0.0, 7});
    auto mechanisms = extract_dem(noisy);
    REQUIRE(!mechanisms.empty());

    bool saw_four_detector = false;
    for (const auto& m : mechanisms) {
        std::vector<uint32_t> dets;
        bool obs = false;
        for (const auto& c : m.components) {
            CHECK(c.detectors.size() <= 2);
            CHECK(!c.detectors.empty());
            std::vector<uint32_t> merged;
            std::set_symmetric_difference(
                dets.begin(), dets.end(), c.detectors.begin(), c.detectors.end(), std::back_inserter(merged));
            dets = std::move(merged);
            obs ^= c.flips_observable;
        }
        CHECK(dets == m.detectors);
        CHECK(obs == m.flips_observable);
        if (m.detectors.size() == 4) {
            saw_four_detector = true;
            CHECK(m.components.size() == 2);
        }
    }
    CHECK(saw_four_detector);  // bulk Y errors fire two detector pairs
}

TEST_CASE("edge weights follow ln((1-p)/p) to 12 digits") {
    std::vector<ErrorMechanism> mechanisms;
    mechanisms.push_back({0.01, {3, 7}, false, {{{3, 7}, false}}});
    mechanisms.push_back({0.2, {3}, true, {{{3}, true}}});
    MatchingGraph graph = build_matching_graph(mechanisms, 10);
    REQUIRE(graph.edges.size() == 2);
    const GraphEdge* pair_edge = nullptr;
    const GraphEdge* boundary_edge = nullptr;
    for (const auto& e : graph.edges)
        (e.v == graph.boundary_node() ? boundary_edge : pair_edge) = &e;
    REQUIRE(pair_edge);
    REQUIRE(boundary_edge);
    CHECK(pair_edge->weight == Approx(std::log(99.0)).epsilon(1e-12));
    CHECK(pair_edge->weight == Approx(4.59512).epsilon(1e-5));
    CHECK(boundary_edge->u == 3);
    CHECK(boundary_edge->flips_observable);
    CHECK(boundary_edge->weight == Approx(std::log(4.0)).epsilon(1e-12));

    MemoryCircuit circuit = build_memory_circuit(build_patch(3), PrepState::Zp, MeasureBasis::Z, 2);
    NoisyCircuit noisy = apply_si1000(circuit, {0.003, 0.0, 1});
    MatchingGraph real_graph = build_matching_graph(noisy);
    for (const auto& e : real_graph.edges) {
        CHECK(e.weight > 0.0);
        CHECK(e.weight == Approx(std::log((1.0 - e.probability) / e.probability)).epsilon(1e-12));
    }
}

TEST_CASE("undecomposable mechanisms are reported") {
    std::vector<ErrorMechanism> mechanisms;
    mechanisms.push_back({0.01, {1, 2, 3}, false, {{{1, 2, 3}, false}}});
    CHECK_THROWS_WITH(
        build_matching_graph(mechanisms, 5), Catch::Matchers::Contains("undecomposable"));
    std::vector<ErrorMechanism> half;
    half.push_back({0.5, {1, 2}, false, {{{1, 2}, false}}});
    CHECK_THROWS_AS(build_matching_graph(half, 5), std::invalid_argument);
}

TEST_CASE("measurement-basis DEM equals the experiment circuit's own DEM") {
    SurfaceCodePatch patch = build_patch(3);
    NoiseParams params{0.003, 0.0, 11};
    // Decoding <X> on |0>_L uses the graph of the |+>_L-prep companion; the
    // channel structure matches the experiment circuit exactly.
    MatchingGraph companion = dem_for_measurement(patch, MeasureBasis::X, 2, params);
    MemoryCircuit experiment = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::X, 2);
    MatchingGraph own = build_matching_graph(apply_si1000(experiment, params));
    REQUIRE(companion.edges.size() == own.edges.size());
    for (size_t i = 0; i < own.edges.size(); i++) {
        CHECK(companion.edges[i].u == own.edges[i].u);
        CHECK(companion.edges[i].v == own.edges[i].v);
        CHECK(companion.edges[i].weight == Approx(own.edges[i].weight).epsilon(1e-12));
        CHECK(companion.edges[i].flips_observable == own.edges[i].flips_observable);
    }

    // Z measurement on Z+ prep: the companion is the experiment itself.
    MatchingGraph z_companion = dem_for_measurement(patch, MeasureBasis::Z, 2, params);
    MemoryCircuit z_exp = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 2);
    MatchingGraph z_own = build_matching_graph(apply_si1000(z_exp, params));
    REQUIRE(z_companion.edges.size() == z_own.edges.size());

    // Y-basis companion circuit is itself detector-deterministic.
    MemoryCircuit y_companion = build_memory_circuit(patch, PrepState::Yp, MeasureBasis::Y, 2);
    CHECK(validate_determinism(y_companion, 16, 3));
    MatchingGraph yg = dem_for_measurement(patch, MeasureBasis::Y, 2, params);
    CHECK(!yg.edges.empty());
}

TEST_CASE("dem and graph text serialization") {
    std::vector<ErrorMechanism> mechanisms;
    mechanisms.push_back({0.01, {3, 7}, false, {{{3, 7}, false}}});
    mechanisms.push_back({0.02, {4}, true, {{{4}, true}}});
    std::string text = dem_to_text(mechanisms);
    CHECK(text == "error(0.01) D3 D7\nerror(0.02) D4 L0\n");
    MatchingGraph graph = build_matching_graph(mechanisms, 8);
    std::string gtext = matching_graph_to_text(graph);
    CHECK(gtext.find("detectors 8") == 0);
    CHECK(gtext.find("edge D3 D7") != std::string::npos);
    CHECK(gtext.find("boundary D4") != std::string::npos);
    CHECK(gtext.find("obs=1") != std::string::npos);
}

TEST_CASE("matching graph text round trip is exact") {
    MemoryCircuit circuit = build_memory_circuit(build_patch(3), PrepState::Zp, MeasureBasis::Z, 2);
    MatchingGraph graph = build_matching_graph(apply_si1000(circuit, {0.003, 0.0, 1}));
    MatchingGraph loaded = matching_graph_from_text(matching_graph_to_text(graph));
    REQUIRE(loaded.n_detectors == graph.n_detectors);
    REQUIRE(loaded.edges.size() == graph.edges.size());
    for (size_t i = 0; i < graph.edges.size(); i++) {
        CHECK(loaded.edges[i].u == graph.edges[i].u);
        CHECK(loaded.edges[i].v == graph.edges[i].v);
        CHECK(loaded.edges[i].weight == graph.edges[i].weight);
        CHECK(loaded.edges[i].flips_observable == graph.edges[i].flips_observable);
        CHECK(loaded.edges[i].probability == graph.edges[i].probability);
    }
    CHECK_THROWS_AS(matching_graph_from_text("garbage"), std::runtime_error);
}
