#include <catch2/catch.hpp>

#include <set>

#include "dextra/patch.hpp"

using namespace dextra;

namespace {

bool even_overlap(const std::vector<int>& a, const std::vector<int>& b) {
    std::set<int> sa(a.begin(), a.end());
    int overlap = 0;
    for (int q : b)
        overlap += sa.count(q);
    return overlap % 2 == 0;
}

}  // namespace

TEST_CASE("build_patch rejects invalid distances") {
    CHECK_THROWS_AS(build_patch(1), std::invalid_argument);
    CHECK_THROWS_AS(build_patch(0), std::invalid_argument);
    CHECK_THROWS_AS(build_patch(-3), std::invalid_argument);
}

TEST_CASE("patch structure invariants for d in 2..13") {
    for (int d = 2; d <= 13; d++) {
        CAPTURE(d);
        SurfaceCodePatch patch = build_patch(d);
        CHECK(patch.num_data() == d * d);
        CHECK(patch.num_stabilizers() == d * d - 1);
        CHECK(patch.num_qubits() == 2 * d * d - 1);
        CHECK(static_cast<int>(patch.logical_z.size()) == d);
        CHECK(static_cast<int>(patch.logical_x.size()) == d);

        int n_x = 0, n_z = 0;
        for (const auto& p : patch.plaquettes) {
            CHECK((p.support.size() == 2 || p.support.size() == 4));
            (p.type == StabilizerType::X ? n_x : n_z)++;
        }
        if (d % 2 == 0) {
            CHECK(n_z == n_x + 1);
        } else {
            CHECK(n_z == n_x);
        }

        // Every X/Z stabilizer pair commutes.
        for (const auto& px : patch.plaquettes) {
            if (px.type != StabilizerType::X)
                continue;
            for (const auto& pz : patch.plaquettes) {
                if (pz.type != StabilizerType::Z)
                    continue;
                CHECK(even_overlap(px.support, pz.support));
            }
        }

        // Logical operators commute with all stabilizers and anticommute
        // with each other.
        for (const auto& p : patch.plaquettes) {
            if (p.type == StabilizerType::X)
                CHECK(even_overlap(p.support, patch.logical_z));
            else
                CHECK(even_overlap(p.support, patch.logical_x));
        }
        CHECK_FALSE(even_overlap(patch.logical_x, patch.logical_z));
    }
}

TEST_CASE("specific patch counts") {
    SurfaceCodePatch d3 = build_patch(3);
    CHECK(d3.num_data() == 9);
    CHECK(d3.num_stabilizers() == 8);
    CHECK(d3.num_qubits() == 17);

    CHECK(build_patch(13).num_qubits() == 337);

    SurfaceCodePatch d2 = build_patch(2);
    CHECK(d2.num_data() == 4);
    CHECK(d2.num_stabilizers() == 3);
    CHECK(d2.logical_z.size() == 2);
    CHECK(d2.logical_x.size() == 2);
}

TEST_CASE("boundary plaquettes have weight 2 and bulk weight 4") {
    SurfaceCodePatch patch = build_patch(5);
    int n_weight2 = 0, n_weight4 = 0;
    for (const auto& p : patch.plaquettes) {
        bool x_edge = (p.center.x == 0 || p.center.x == 2 * patch.distance);
        bool y_edge = (p.center.y == 0 || p.center.y == 2 * patch.distance);
        if (x_edge || y_edge) {
            CHECK(p.support.size() == 2);
            n_weight2++;
            // Top/bottom boundaries host X checks, left/right host Z.
            CHECK(p.type == (y_edge ? StabilizerType::X : StabilizerType::Z));
        } else {
            CHECK(p.support.size() == 4);
            n_weight4++;
        }
    }
    CHECK(n_weight2 == 2 * (patch.distance - 1));
    CHECK(n_weight4 == (patch.distance - 1) * (patch.distance - 1));
}
