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

#ifndef DEXTRA_DEM_HPP
#define DEXTRA_DEM_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dextra/frame.hpp"
#include "dextra/noise.hpp"

namespace dextra {

/// XOR-combination of independent flip probabilities.
inline double combine_flip_probability(double p1, double p2) {
    return p1 * (1.0 - p2) + p2 * (1.0 - p1);
}

/// A graphlike component of an error mechanism: at most two detectors.
struct MechanismComponent {
    std::vector<uint32_t> detectors;
    bool flips_observable = false;

    bool operator==(const MechanismComponent&) const = default;
    auto operator<=>(const MechanismComponent&) const = default;
};

struct ErrorMechanism {
    double probability = 0.0;
    std::vector<uint32_t> detectors;  // sorted
    bool flips_observable = false;
    // Graphlike decomposition; symptom XOR of the components reproduces
    // (detectors, flips_observable).
    std::vector<MechanismComponent> components;
};

struct GraphEdge {
    int u;
    int v;  // == boundary node for boundary edges
    double weight;
    bool flips_observable;
    double probability;
};

struct MatchingGraph {
    int n_detectors = 0;
    std::vector<GraphEdge> edges;

    int boundary_node() const {
        return n_detectors;
    }
};

namespace detail {

struct SymptomKey {
    std::vector<uint32_t> detectors;
    bool obs;
    std::vector<MechanismComponent> components;

    auto operator<=>(const SymptomKey&) const = default;
};

/// Caches the symptom of every atomic fault: a single X or Z component at
/// one circuit location, or a single record flip.
class AtomCache {
   public:
    AtomCache(const MemoryCircuit& circuit) : circuit_(circuit) {}

    const MechanismComponent& pauli_atom(size_t instr_index, int qubit, char part) {
        uint64_t key = (static_cast<uint64_t>(instr_index) * circuit_.num_qubits() + qubit) * 2 + (part == 'Z');
        auto it = pauli_atoms_.find(key);
        if (it != pauli_atoms_.end())
            return it->second;
        PauliString frame(circuit_.num_qubits());
        if (part == 'X')
            frame.x.set(qubit, true);
        else
            frame.z.set(qubit, true);
        BitVec flips = propagate_frame(circuit_, std::move(frame), instr_index + 1);
        return pauli_atoms_.emplace(key, symptom(flips)).first->second;
    }

    const MechanismComponent& record_atom(int record) {
        auto it = record_atoms_.find(record);
        if (it != record_atoms_.end())
            return it->second;
        BitVec flips(circuit_.num_measurements());
        flips.set(record, true);
        return record_atoms_.emplace(record, symptom(flips)).first->second;
    }

   private:
    MechanismComponent symptom(const BitVec& flips) const {
        MechanismComponent out;
        for (size_t k = 0; k < circuit_.detectors.size(); k++) {
            bool parity = false;
            for (int m : circuit_.detectors[k].measurement_indices)
                parity ^= flips.get(m);
            if (parity)
                out.detectors.push_back(static_cast<uint32_t>(k));
        }
        for (int m : circuit_.observable.measurement_indices)
            out.flips_observable ^= flips.get(m);
        return out;
    }

    const MemoryCircuit& circuit_;
    std::map<uint64_t, MechanismComponent> pauli_atoms_;
    std::map<int, MechanismComponent> record_atoms_;
};

inline std::vector<uint32_t> xor_detectors(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    std::vector<uint32_t> out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Combines the atoms of one error term into graphlike components: the
// X-part and Z-part symptoms become one component each when graphlike,
// otherwise the per-qubit atoms stand individually.
inline std::vector<MechanismComponent> term_components(const std::vector<const MechanismComponent*>& x_atoms,
                                                       const std::vector<const MechanismComponent*>& z_atoms) {
    std::vector<MechanismComponent> out;
    for (const auto& group : {x_atoms, z_atoms}) {
        if (group.empty())
            continue;
        MechanismComponent part;
        for (const auto* atom : group) {
            part.detectors = xor_detectors(part.detectors, atom->detectors);
            part.flips_observable ^= atom->flips_observable;
        }
        if (part.detectors.empty() && !part.flips_observable)
            continue;
        if (part.detectors.size() <= 2) {
            out.push_back(std::move(part));
        } else {
            for (const auto* atom : group)
                if (!atom->detectors.empty() || atom->flips_observable)
                    out.push_back(*atom);
        }
    }
    return out;
}

}  // namespace detail

/// Extracts the detector error model: every nonidentity Pauli term of every
/// channel is propagated through the remaining circuit, identical symptoms
/// are merged with p1(1-p2) + p2(1-p1), and each mechanism carries its
/// graphlike decomposition.
inline std::vector<ErrorMechanism> extract_dem(const NoisyCircuit& noisy) {
    const MemoryCircuit& circuit = noisy.base;
    detail::AtomCache cache(circuit);
    std::map<detail::SymptomKey, double> merged;

    auto add_term = [&](const std::vector<MechanismComponent>& components, double p) {
        if (p <= 0.0)
            return;
        std::vector<uint32_t> dets;
        bool obs = false;
        for (const auto& c : components) {
            dets = detail::xor_detectors(dets, c.detectors);
            obs ^= c.flips_observable;
        }
        if (dets.empty() && !obs)
            return;
        detail::SymptomKey key{std::move(dets), obs, components};
        auto [it, inserted] = merged.try_emplace(std::move(key), 0.0);
        it->second = combine_flip_probability(it->second, p);
    };

    auto pauli_term = [&](size_t instr, double p, int q0, char p0, int q1 = -1, char p1 = 'I') {
        std::vector<const MechanismComponent*> x_atoms, z_atoms;
        for (auto [q, c] : {std::pair{q0, p0}, std::pair{q1, p1}}) {
            if (q < 0 || c == 'I')
                continue;
            if (c == 'X' || c == 'Y')
                x_atoms.push_back(&cache.pauli_atom(instr, q, 'X'));
            if (c == 'Z' || c == 'Y')
                z_atoms.push_back(&cache.pauli_atom(instr, q, 'Z'));
        }
        add_term(detail::term_components(x_atoms, z_atoms), p);
    };

    for (const NoiseChannel& ch : noisy.channels) {
        size_t i = static_cast<size_t>(ch.instr_index);
        switch (ch.kind) {
            case ChannelKind::depolarize1:
                for (char c : {'X', 'Y', 'Z'})
                    pauli_term(i, ch.probability / 3.0, ch.q0, c);
                break;
            case ChannelKind::depolarize2:
                for (int term = 1; term < 16; term++)
                    pauli_term(i, ch.probability / 15.0, ch.q0, "IXYZ"[term >> 2], ch.q1, "IXYZ"[term & 3]);
                break;
            case ChannelKind::x_flip:
                pauli_term(i, ch.probability, ch.q0, 'X');
                break;
            case ChannelKind::measurement_flip: {
                const MechanismComponent& atom = cache.record_atom(ch.record);
                if (!atom.detectors.empty() || atom.flips_observable)
                    add_term({atom}, ch.probability);
                break;
            }
        }
    }

    std::vector<ErrorMechanism> mechanisms;
    mechanisms.reserve(merged.size());
    for (auto& [key, p] : merged) {
        if (p >= 0.5)
            throw std::invalid_argument("extract_dem: merged mechanism probability reached 0.5");
        mechanisms.push_back({p, key.detectors, key.obs, key.components});
    }
    return mechanisms;
}

/// Turns mechanisms into the decoding graph. Mechanisms with more than two
/// detectors contribute through their graphlike components; a mechanism
/// that cannot be decomposed raises an error naming it.
inline MatchingGraph build_matching_graph(const std::vector<ErrorMechanism>& mechanisms, int n_detectors) {
    struct EdgeAccum {
        double p = 0.0;
        bool obs = false;
        bool obs_set = false;
    };
    std::map<std::pair<int, int>, EdgeAccum> accum;
    const int boundary = n_detectors;

    auto describe = [](const ErrorMechanism& m) {
        std::ostringstream msg;
        msg << "mechanism p=" << m.probability << " {";
        for (uint32_t d : m.detectors)
            msg << " D" << d;
        msg << (m.flips_observable ? " L0 }" : " }");
        return msg.str();
    };

    for (const ErrorMechanism& m : mechanisms) {
        for (const MechanismComponent& c : m.components) {
            if (c.detectors.empty() && !c.flips_observable)
                continue;
            if (c.detectors.empty() || c.detectors.size() > 2)
                throw std::invalid_argument("build_matching_graph: undecomposable " + describe(m));
            int u = static_cast<int>(c.detectors.front());
            int v = c.detectors.size() == 2 ? static_cast<int>(c.detectors.back()) : boundary;
            EdgeAccum& e = accum[{std::min(u, v), std::max(u, v)}];
            if (e.obs_set && e.obs != c.flips_observable)
                throw std::invalid_argument("build_matching_graph: conflicting observable flags on " + describe(m));
            e.obs = c.flips_observable;
            e.obs_set = true;
            e.p = combine_flip_probability(e.p, m.probability);
        }
    }

    MatchingGraph graph;
    graph.n_detectors = n_detectors;
    graph.edges.reserve(accum.size());
    for (const auto& [key, e] : accum) {
        if (e.p >= 0.5)
            throw std::invalid_argument("build_matching_graph: edge probability reached 0.5");
        graph.edges.push_back({key.first, key.second, std::log((1.0 - e.p) / e.p), e.obs, e.p});
    }
    return graph;
}

inline MatchingGraph build_matching_graph(const NoisyCircuit& noisy) {
    return build_matching_graph(extract_dem(noisy), noisy.base.num_detectors());
}

/// Decoding graph for a given measurement basis, derived from the
/// companion circuit that prepares the + eigenstate of that basis. Shots
/// from any preparation measured in this basis decode against this graph.
inline MatchingGraph dem_for_measurement(
    const SurfaceCodePatch& patch, MeasureBasis basis, int rounds_factor, const NoiseParams& params) {
    MemoryCircuit companion = build_memory_circuit(patch, plus_eigenstate(basis), basis, rounds_factor);
    NoisyCircuit noisy = apply_si1000(companion, params);
    return build_matching_graph(noisy);
}

inline std::string dem_to_text(const std::vector<ErrorMechanism>& mechanisms) {
    std::ostringstream out;
    out.precision(12);
    for (const auto& m : mechanisms) {
        out << "error(" << m.probability << ")";
        for (uint32_t d : m.detectors)
            out << " D" << d;
        if (m.flips_observable)
            out << " L0";
        out << "\n";
    }
    return out.str();
}

inline std::string matching_graph_to_text(const MatchingGraph& graph) {
    std::ostringstream out;
    out.precision(17);  // exact double round trip
    out << "detectors " << graph.n_detectors << "\n";
    for (const auto& e : graph.edges) {
        if (e.v == graph.boundary_node())
            out << "boundary D" << e.u;
        else
            out << "edge D" << e.u << " D" << e.v;
        out << " w=" << e.weight << " obs=" << (e.flips_observable ? 1 : 0) << " p=" << e.probability << "\n";
    }
    return out.str();
}

inline MatchingGraph matching_graph_from_text(const std::string& text) {
    MatchingGraph graph;
    std::istringstream in(text);
    std::string token;
    if (!(in >> token) || token != "detectors" || !(in >> graph.n_detectors))
        throw std::runtime_error("matching graph text: bad header");
    while (in >> token) {
        GraphEdge e{};
        auto read_det = [&](const char* what) {
            std::string d;
            if (!(in >> d) || d.size() < 2 || d[0] != 'D')
                throw std::runtime_error(std::string("matching graph text: expected detector after ") + what);
            return std::stoi(d.substr(1));
        };
        if (token == "edge") {
            e.u = read_det("edge");
            e.v = read_det("edge");
        } else if (token == "boundary") {
            e.u = read_det("boundary");
            e.v = graph.n_detectors;
        } else {
            throw std::runtime_error("matching graph text: unknown record '" + token + "'");
        }
        std::string w, obs, p;
        if (!(in >> w >> obs >> p) || w.rfind("w=", 0) != 0 || obs.rfind("obs=", 0) != 0 || p.rfind("p=", 0) != 0)
            throw std::runtime_error("matching graph text: malformed edge attributes");
        e.weight = std::stod(w.substr(2));
        e.flips_observable = obs.substr(4) == "1";
        e.probability = std::stod(p.substr(2));
        graph.edges.push_back(e);
    }
    return graph;
}

}  // namespace dextra

#endif
