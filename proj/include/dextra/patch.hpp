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

#ifndef DEXTRA_PATCH_HPP
#define DEXTRA_PATCH_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dextra {

struct Coord {
    int x;
    int y;

    bool operator==(const Coord&) const = default;
};

enum class StabilizerType : uint8_t { X, Z };

struct Plaquette {
    StabilizerType type;
    Coord center;                 // even-coordinate grid position
    std::vector<int> support;     // data qubit indices, weight 2 or 4
};

/// Rotated surface code patch of distance d.
///
/// Data qubits sit at odd coordinates (2i+1, 2j+1) for i, j in [0, d) and
/// are indexed row-major (index = j*d + i). Plaquette ancillas sit at even
/// coordinates. The logical Z is the horizontal chain along row 0, the
/// logical X the vertical chain along column 0. Weight-2 X plaquettes live
/// on the top/bottom edges, weight-2 Z plaquettes on the left/right edges.
struct SurfaceCodePatch {
    int distance = 0;
    std::vector<Coord> data_qubits;
    std::vector<Plaquette> plaquettes;   // sorted by (center.y, center.x)
    std::vector<int> logical_z;          // data indices, weight d
    std::vector<int> logical_x;          // data indices, weight d

    int num_data() const {
        return distance * distance;
    }
    int num_stabilizers() const {
        return static_cast<int>(plaquettes.size());
    }
    /// Data qubits plus one ancilla per plaquette.
    int num_qubits() const {
        return num_data() + num_stabilizers();
    }
    /// Ancilla qubit index of plaquette k.
    int ancilla_qubit(int k) const {
        return num_data() + k;
    }

    std::vector<std::vector<int>> stabilizers_of_type(StabilizerType t) const {
        std::vector<std::vector<int>> out;
        for (const auto& p : plaquettes)
            if (p.type == t)
                out.push_back(p.support);
        return out;
    }
};

inline SurfaceCodePatch build_patch(int d) {
    if (d < 2)
        throw std::invalid_argument("build_patch: distance must be >= 2, got " + std::to_string(d));

    SurfaceCodePatch patch;
    patch.distance = d;
    patch.data_qubits.reserve(static_cast<size_t>(d) * d);
    for (int j = 0; j < d; j++)
        for (int i = 0; i < d; i++)
            patch.data_qubits.push_back({2 * i + 1, 2 * j + 1});

    // Plaquette candidates on the even grid (2a, 2b), a, b in [0, d].
    // Checkerboard color: X iff (a + b) even. Top/bottom edges keep only X
    // plaquettes, left/right edges only Z, corners none. This yields d^2-1
    // stabilizers, with one extra Z relative to X at even d.
    for (int b = 0; b <= d; b++) {
        for (int a = 0; a <= d; a++) {
            bool a_edge = (a == 0 || a == d);
            bool b_edge = (b == 0 || b == d);
            if (a_edge && b_edge)
                continue;
            StabilizerType type = ((a + b) % 2 == 0) ? StabilizerType::X : StabilizerType::Z;
            if (b_edge && type != StabilizerType::X)
                continue;
            if (a_edge && type != StabilizerType::Z)
                continue;

            Plaquette p;
            p.type = type;
            p.center = {2 * a, 2 * b};
            for (int dj : {-1, 0}) {
                for (int di : {-1, 0}) {
                    int i = a + di;
                    int j = b + dj;
                    if (i >= 0 && i < d && j >= 0 && j < d)
                        p.support.push_back(j * d + i);
                }
            }
            patch.plaquettes.push_back(std::move(p));
        }
    }

    for (int i = 0; i < d; i++)
        patch.logical_z.push_back(i);          // row j = 0
    for (int j = 0; j < d; j++)
        patch.logical_x.push_back(j * d);      // column i = 0

    return patch;
}

}  // namespace dextra

#endif
