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

#ifndef DEXTRA_EV_HPP
#define DEXTRA_EV_HPP

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "dextra/circuit.hpp"
#include "dextra/matching.hpp"

namespace dextra {

struct EVEstimate {
    double value = 0.0;
    double std_err = 0.0;
    uint64_t n_shots = 0;
    std::string state_label;
    std::string observable;
    int d = 0;
    double p = 0.0;
};

/// E = sign * (1 - 2 P_L), with the binomial error of P_L propagated.
inline EVEstimate ev_from_ler(double p_l, double p_l_std_err, int noiseless_sign, uint64_t n_shots = 0) {
    if (!(p_l >= 0.0 && p_l <= 1.0))
        throw std::invalid_argument("ev_from_ler: P_L outside [0, 1]");
    EVEstimate ev;
    ev.value = noiseless_sign * (1.0 - 2.0 * p_l);
    ev.std_err = 2.0 * p_l_std_err;
    ev.n_shots = n_shots;
    return ev;
}

inline EVEstimate ev_from_ler(const LerEstimate& ler, int noiseless_sign) {
    return ev_from_ler(ler.p_l, ler.std_err, noiseless_sign, ler.n_shots);
}

/// Single-qubit stabilizer states in the order (|+>, |->, |+i>, |-i>, |0>, |1>).
inline constexpr std::array<PrepState, 6> kStabilizerBasis = {
    PrepState::Xp, PrepState::Xm, PrepState::Yp, PrepState::Ym, PrepState::Zp, PrepState::Zm};

/// A(j, i) = Tr[P_j sigma_i] for P in {I, X, Y, Z} over the basis above.
inline Eigen::Matrix<double, 4, 6> stabilizer_pauli_matrix() {
    Eigen::Matrix<double, 4, 6> a;
    a << 1, 1, 1, 1, 1, 1,
         1, -1, 0, 0, 0, 0,
         0, 0, 1, -1, 0, 0,
         0, 0, 0, 0, 1, -1;
    return a;
}

struct StabilizerDecomposition {
    Eigen::Matrix<double, 6, 1> x;  // quasiprobabilities over kStabilizerBasis
    Eigen::Vector4d b;              // Tr[rho P]
    double robustness = 0.0;        // sum |x_i|
};

/// Exact L1-minimal stabilizer pseudomixture of a single-qubit state: all
/// basic solutions of Ax = b are enumerated (supports of size <= 4) and the
/// lexicographically largest minimum-norm vertex is returned.
inline StabilizerDecomposition decompose_state(const Eigen::Vector4d& b) {
    if (std::abs(b[0] - 1.0) > 1e-9)
        throw std::invalid_argument("decompose_state: state must have unit trace");
    double bloch = std::sqrt(b[1] * b[1] + b[2] * b[2] + b[3] * b[3]);
    if (bloch > 1.0 + 1e-9)
        throw std::invalid_argument("decompose_state: Bloch vector norm exceeds 1");

    const Eigen::Matrix<double, 4, 6> a = stabilizer_pauli_matrix();
    Eigen::Matrix<double, 6, 1> best = Eigen::Matrix<double, 6, 1>::Zero();
    double best_l1 = std::numeric_limits<double>::infinity();
    bool found = false;

    auto lex_larger = [](const Eigen::Matrix<double, 6, 1>& u, const Eigen::Matrix<double, 6, 1>& v) {
        for (int i = 0; i < 6; i++) {
            if (std::abs(u[i] - v[i]) > 1e-9)
                return u[i] > v[i];
        }
        return false;
    };

    // Supports of size up to 4 cover every vertex of the L1 program.
    for (int mask = 1; mask < 64; mask++) {
        int size = std::popcount(static_cast<unsigned>(mask));
        if (size > 4)
            continue;
        Eigen::MatrixXd sub(4, size);
        std::array<int, 4> cols{};
        int c = 0;
        for (int i = 0; i < 6; i++)
            if (mask & (1 << i)) {
                sub.col(c) = a.col(i);
                cols[c++] = i;
            }
        Eigen::VectorXd sol = sub.fullPivHouseholderQr().solve(b);
        if ((sub * sol - b).norm() > 1e-10)
            continue;
        Eigen::Matrix<double, 6, 1> x = Eigen::Matrix<double, 6, 1>::Zero();
        for (int i = 0; i < size; i++)
            x[cols[i]] = sol[i];
        double l1 = x.cwiseAbs().sum();
        if (!found || l1 < best_l1 - 1e-9 || (l1 < best_l1 + 1e-9 && lex_larger(x, best))) {
            best = x;
            best_l1 = std::min(best_l1, l1);
            found = true;
        }
    }
    if (!found)
        throw std::invalid_argument("decompose_state: no feasible decomposition");

    StabilizerDecomposition out;
    out.x = best;
    out.b = b;
    out.robustness = best.cwiseAbs().sum();
    return out;
}

/// Pauli targets of an XY-plane state R_z(theta)|+>: b = (1, cos t, sin t, 0).
inline Eigen::Vector4d xy_plane_target(double theta) {
    if (theta < 0.0 || theta > 3.14159265358979323846 + 1e-12)
        throw std::invalid_argument("xy_plane_target: theta outside [0, pi]");
    return {1.0, std::cos(theta), std::sin(theta), 0.0};
}

/// Quasiprobability combination of component estimates: value picks up the
/// coefficients, variances their squares.
inline EVEstimate combine_evs(
    const StabilizerDecomposition& decomposition, const std::array<EVEstimate, 6>& components) {
    EVEstimate out;
    out.observable = components[0].observable;
    out.d = components[0].d;
    out.p = components[0].p;
    double var = 0.0;
    for (int i = 0; i < 6; i++) {
        const EVEstimate& c = components[i];
        if (c.observable != out.observable || c.d != out.d || c.p != out.p)
            throw std::invalid_argument("combine_evs: component labels disagree");
        out.value += decomposition.x[i] * c.value;
        var += decomposition.x[i] * decomposition.x[i] * c.std_err * c.std_err;
        out.n_shots += c.n_shots;
    }
    out.std_err = std::sqrt(var);
    return out;
}

namespace detail {

inline std::array<Eigen::Matrix2cd, 4> pauli_matrices() {
    using namespace std::complex_literals;
    Eigen::Matrix2cd id, x, y, z;
    id << 1, 0, 0, 1;
    x << 0, 1, 1, 0;
    y << 0, -1i, 1i, 0;
    z << 1, 0, 0, -1;
    return {id, x, y, z};
}

}  // namespace detail

/// rho = (I + ex X + ey Y + ez Z) / 2, radially projected into the Bloch
/// ball when sampling noise pushes the estimates outside.
inline Eigen::Matrix2cd state_tomography(double ex, double ey, double ez) {
    double norm = std::sqrt(ex * ex + ey * ey + ez * ez);
    if (norm > 1.0) {
        ex /= norm;
        ey /= norm;
        ez /= norm;
    }
    auto paulis = detail::pauli_matrices();
    return 0.5 * (paulis[0] + ex * paulis[1] + ey * paulis[2] + ez * paulis[3]);
}

/// Single-qubit process matrix in the {I, X, Y, Z} basis: the channel acts
/// as rho -> sum_mn chi(m, n) P_m rho P_n.
struct ProcessMatrix {
    Eigen::Matrix4cd chi;
};

/// Reconstructs chi from the channel outputs for the four tomography
/// inputs |0>, |1>, |+>, |+i>.
inline ProcessMatrix process_tomography(
    const Eigen::Matrix2cd& rho_out_0, const Eigen::Matrix2cd& rho_out_1, const Eigen::Matrix2cd& rho_out_plus,
    const Eigen::Matrix2cd& rho_out_plusi) {
    using namespace std::complex_literals;
    Eigen::Matrix2cd rho1 = rho_out_0;
    Eigen::Matrix2cd rho4 = rho_out_1;
    Eigen::Matrix2cd sum14 = rho1 + rho4;
    // E(|0><1|) and E(|1><0|) from the +/i input combinations.
    Eigen::Matrix2cd upper = rho_out_plus + 1i * rho_out_plusi - 0.5 * (1.0 + 1i) * sum14;
    Eigen::Matrix2cd lower = rho_out_plus - 1i * rho_out_plusi - 0.5 * (1.0 - 1i) * sum14;

    Eigen::Matrix4cd block;
    block.topLeftCorner<2, 2>() = rho1;
    block.topRightCorner<2, 2>() = upper;
    block.bottomLeftCorner<2, 2>() = lower;
    block.bottomRightCorner<2, 2>() = rho4;

    // Lambda = [[I, X], [X, -I]] / 2 as a 4x4 block matrix.
    Eigen::Matrix4cd lambda = Eigen::Matrix4cd::Zero();
    lambda(0, 0) = lambda(1, 1) = 0.5;
    lambda(0, 3) = lambda(1, 2) = 0.5;
    lambda(2, 1) = lambda(3, 0) = 0.5;
    lambda(2, 2) = lambda(3, 3) = -0.5;

    Eigen::Matrix4cd chi_tilde = lambda * block * lambda;

    // The prescription's operator basis is {I, X, -iY, Z}; convert to pure
    // Pauli indexing.
    Eigen::Vector4cd f{1.0, 1.0, -1i, 1.0};
    ProcessMatrix out;
    for (int m = 0; m < 4; m++)
        for (int n = 0; n < 4; n++)
            out.chi(m, n) = f[m] * chi_tilde(m, n) * std::conj(f[n]);
    return out;
}

/// Applies the chi channel to the state with Pauli targets b and returns
/// the requested observable of the output.
inline double ev_via_channel(const ProcessMatrix& process, const Eigen::Vector4d& b, char observable) {
    auto paulis = detail::pauli_matrices();
    Eigen::Matrix2cd rho_in =
        0.5 * (b[0] * paulis[0] + b[1] * paulis[1] + b[2] * paulis[2] + b[3] * paulis[3]);
    Eigen::Matrix2cd rho_out = Eigen::Matrix2cd::Zero();
    for (int m = 0; m < 4; m++)
        for (int n = 0; n < 4; n++)
            rho_out += process.chi(m, n) * paulis[m] * rho_in * paulis[n];
    int idx;
    switch (observable) {
        case 'I': idx = 0; break;
        case 'X': idx = 1; break;
        case 'Y': idx = 2; break;
        case 'Z': idx = 3; break;
        default:
            throw std::invalid_argument("ev_via_channel: unknown observable");
    }
    return (paulis[idx] * rho_out).trace().real();
}

}  // namespace dextra

#endif
