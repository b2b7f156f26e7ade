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

// Prints a small patch layout and the memory circuit built on it.

#include <cstdio>

#include "dextra/circuit.hpp"

int main() {
    using namespace dextra;
    SurfaceCodePatch patch = build_patch(3);
    std::printf("distance %d: %d data qubits, %d stabilizers, %d qubits total\n",
                patch.distance, patch.num_data(), patch.num_stabilizers(), patch.num_qubits());
    for (int k = 0; k < patch.num_stabilizers(); k++) {
        const Plaquette& p = patch.plaquettes[k];
        std::printf("  %c plaquette at (%d,%d):", p.type == StabilizerType::X ? 'X' : 'Z', p.center.x, p.center.y);
        for (int q : p.support)
            std::printf(" %d", q);
        std::printf("\n");
    }
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 1);
    std::printf("\nmemory circuit: %d rounds, %d measurements, %d detectors\n",
                circuit.rounds, circuit.num_measurements(), circuit.num_detectors());
    std::printf("%s", circuit_to_text(circuit).c_str());
    return 0;
}
