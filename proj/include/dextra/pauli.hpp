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

#ifndef DEXTRA_PAULI_HPP
#define DEXTRA_PAULI_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dextra {

inline size_t words_for_bits(size_t n_bits) {
    return (n_bits + 63) / 64;
}

/// Packed bit vector with xor/parity helpers. Used for Pauli masks, frames
/// and shot records.
class BitVec {
   public:
    BitVec() = default;
    explicit BitVec(size_t n_bits) : n_bits_(n_bits), words_(words_for_bits(n_bits), 0) {}

    size_t num_bits() const {
        return n_bits_;
    }

    bool get(size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1;
    }

    void set(size_t i, bool v) {
        uint64_t mask = uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    void toggle(size_t i) {
        words_[i >> 6] ^= uint64_t{1} << (i & 63);
    }

    void clear() {
        for (auto& w : words_)
            w = 0;
    }

    void operator^=(const BitVec& other) {
        for (size_t k = 0; k < words_.size(); k++)
            words_[k] ^= other.words_[k];
    }

    bool none() const {
        for (auto w : words_)
            if (w)
                return false;
        return true;
    }

    /// Parity of the AND with another vector of the same size.
    bool and_parity(const BitVec& other) const {
        uint64_t acc = 0;
        for (size_t k = 0; k < words_.size(); k++)
            acc ^= words_[k] & other.words_[k];
        return std::popcount(acc) & 1;
    }

    size_t count() const {
        size_t c = 0;
        for (auto w : words_)
            c += std::popcount(w);
        return c;
    }

    std::vector<uint64_t>& words() {
        return words_;
    }
    const std::vector<uint64_t>& words() const {
        return words_;
    }

    bool operator==(const BitVec& other) const = default;

   private:
    size_t n_bits_ = 0;
    std::vector<uint64_t> words_;
};

/// Dense Pauli string over n qubits: X^x Z^z per qubit, no global phase.
/// Phases are tracked separately where they matter (tableau rows).
struct PauliString {
    BitVec x;
    BitVec z;

    PauliString() = default;
    explicit PauliString(size_t n) : x(n), z(n) {}

    size_t num_qubits() const {
        return x.num_bits();
    }

    bool is_identity() const {
        return x.none() && z.none();
    }

    bool commutes_with(const PauliString& other) const {
        return !(x.and_parity(other.z) ^ z.and_parity(other.x));
    }

    void mul_ignoring_phase(const PauliString& other) {
        x ^= other.x;
        z ^= other.z;
    }

    void set_pauli(size_t q, char p) {
        switch (p) {
            case 'I':
                x.set(q, false);
                z.set(q, false);
                break;
            case 'X':
                x.set(q, true);
                z.set(q, false);
                break;
            case 'Y':
                x.set(q, true);
                z.set(q, true);
                break;
            case 'Z':
                x.set(q, false);
                z.set(q, true);
                break;
            default:
                throw std::invalid_argument("unknown Pauli character");
        }
    }

    char pauli_at(size_t q) const {
        bool xb = x.get(q), zb = z.get(q);
        if (xb && zb)
            return 'Y';
        if (xb)
            return 'X';
        if (zb)
            return 'Z';
        return 'I';
    }

    std::string str() const {
        std::string s;
        s.reserve(num_qubits());
        for (size_t q = 0; q < num_qubits(); q++)
            s.push_back(pauli_at(q));
        return s;
    }
};

/// Sparse single/two-qubit Pauli used for noise channel terms and fault
/// injection. qubit2 < 0 for one-qubit terms.
struct SparsePauli {
    int qubit1 = -1;
    char pauli1 = 'I';
    int qubit2 = -1;
    char pauli2 = 'I';
};

}  // namespace dextra

#endif
