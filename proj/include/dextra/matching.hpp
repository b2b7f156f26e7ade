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

#ifndef DEXTRA_MATCHING_HPP
#define DEXTRA_MATCHING_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dextra/blossom.hpp"
#include "dextra/dem.hpp"
#include "dextra/frame.hpp"
#include "dextra/shots.hpp"

namespace dextra {

struct DecodeResult {
    static constexpr int64_t kWeightScale = int64_t{1} << 20;

    bool flips_observable = false;
    int64_t weight_scaled = 0;  // total matching weight in kWeightScale units

    double weight() const {
        return static_cast<double>(weight_scaled) / static_cast<double>(kWeightScale);
    }
};

struct LerEstimate {
    double p_l = 0.0;
    double std_err = 0.0;
    uint64_t n_fails = 0;
    uint64_t n_shots = 0;
};

inline LerEstimate ler_from_counts(uint64_t n_fails, uint64_t n_shots) {
    if (n_shots == 0)
        throw std::invalid_argument("estimate_ler: zero shots");
    double p = static_cast<double>(n_fails) / static_cast<double>(n_shots);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_shots)), n_fails, n_shots};
}

/// Decoder context: all-pairs shortest paths over the matching graph (with
/// observable-flip parities), per-node boundary distances, and connected
/// components. Flagged detectors are matched exactly per shot by pairing
/// each with a virtual boundary partner and running blossom matching.
class PreparedDecoder {
   public:
    static constexpr int64_t kWeightScale = DecodeResult::kWeightScale;

    explicit PreparedDecoder(const MatchingGraph& graph) : n_(graph.n_detectors) {
        struct Adj {
            int to;
            float w;
            bool obs;
        };
        std::vector<std::vector<Adj>> adj(n_);
        boundary_edge_.assign(n_, {std::numeric_limits<float>::infinity(), false});
        component_.assign(n_, -1);

        for (const auto& e : graph.edges) {
            if (e.weight <= 0.0)
                throw std::invalid_argument("PreparedDecoder: nonpositive edge weight");
            if (e.v == graph.boundary_node()) {
                auto& b = boundary_edge_[e.u];
                if (static_cast<float>(e.weight) < b.first)
                    b = {static_cast<float>(e.weight), e.flips_observable};
            } else {
                adj[e.u].push_back({e.v, static_cast<float>(e.weight), e.flips_observable});
                adj[e.v].push_back({e.u, static_cast<float>(e.weight), e.flips_observable});
            }
        }

        // Connected components over real-real edges.
        n_components_ = 0;
        for (int start = 0; start < n_; start++) {
            if (component_[start] >= 0)
                continue;
            int c = n_components_++;
            std::vector<int> stack{start};
            component_[start] = c;
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (const auto& a : adj[u]) {
                    if (component_[a.to] < 0) {
                        component_[a.to] = c;
                        stack.push_back(a.to);
                    }
                }
            }
        }
        component_has_obs_.assign(n_components_, false);
        component_has_boundary_.assign(n_components_, false);
        for (const auto& e : graph.edges) {
            if (e.flips_observable)
                component_has_obs_[component_[e.u]] = true;
            if (e.v == graph.boundary_node())
                component_has_boundary_[component_[e.u]] = true;
        }

        // All-pairs shortest paths by Dijkstra from every detector, with
        // observable parity carried along the tree. Ties broken toward the
        // smaller predecessor for cross-platform determinism.
        const float inf = std::numeric_limits<float>::infinity();
        dist_.assign(static_cast<size_t>(n_) * n_, inf);
        parity_ = BitVec(static_cast<size_t>(n_) * n_);
        boundary_dist_.assign(n_, inf);
        boundary_parity_ = BitVec(n_);

        std::vector<float> dist(n_);
        std::vector<int> pred(n_);
        std::vector<uint8_t> parity(n_), done(n_);
        using QItem = std::pair<float, int>;
        for (int src = 0; src < n_; src++) {
            std::fill(dist.begin(), dist.end(), inf);
            std::fill(parity.begin(), parity.end(), 0);
            std::fill(done.begin(), done.end(), 0);
            std::fill(pred.begin(), pred.end(), -1);
            std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;
            dist[src] = 0.0f;
            pq.push({0.0f, src});
            while (!pq.empty()) {
                auto [du, u] = pq.top();
                pq.pop();
                if (done[u])
                    continue;
                done[u] = 1;
                for (const auto& a : adj[u]) {
                    float nd = dist[u] + a.w;
                    bool np = parity[u] ^ a.obs;
                    if (nd < dist[a.to] || (nd == dist[a.to] && !done[a.to] && u < pred[a.to])) {
                        dist[a.to] = nd;
                        parity[a.to] = np;
                        pred[a.to] = u;
                        pq.push({nd, a.to});
                    }
                }
            }
            float best_b = inf;
            bool best_bp = false;
            int best_via = -1;
            for (int v = 0; v < n_; v++) {
                dist_[static_cast<size_t>(src) * n_ + v] = dist[v];
                if (parity[v])
                    parity_.set(static_cast<size_t>(src) * n_ + v, true);
                if (dist[v] < inf && boundary_edge_[v].first < inf) {
                    float b = dist[v] + boundary_edge_[v].first;
                    if (b < best_b || (b == best_b && v < best_via)) {
                        best_b = b;
                        best_bp = parity[v] ^ boundary_edge_[v].second;
                        best_via = v;
                    }
                }
            }
            boundary_dist_[src] = best_b;
            boundary_parity_.set(src, best_bp);
        }
    }

    int n_detectors() const {
        return n_;
    }
    double distance(int u, int v) const {
        return dist_[static_cast<size_t>(u) * n_ + v];
    }
    bool path_parity(int u, int v) const {
        return parity_.get(static_cast<size_t>(u) * n_ + v);
    }
    double boundary_distance(int u) const {
        return boundary_dist_[u];
    }
    bool boundary_parity(int u) const {
        return boundary_parity_.get(u);
    }

    /// Exact minimum-weight matching of all flagged detectors.
    DecodeResult decode_shot(const std::vector<uint32_t>& fired) const {
        return decode_internal(fired, false);
    }

    /// Observable-flip prediction only; components whose edges cannot flip
    /// the observable are checked for feasibility but not matched.
    bool decode_observable(const std::vector<uint32_t>& fired) const {
        return decode_internal(fired, true).flips_observable;
    }

   private:
    DecodeResult decode_internal(const std::vector<uint32_t>& fired, bool obs_only) const {
        DecodeResult result;
        if (fired.empty())
            return result;
        // Group by component; fired lists arrive sorted by detector id.
        std::vector<std::pair<int, uint32_t>> grouped;
        grouped.reserve(fired.size());
        for (uint32_t f : fired)
            grouped.push_back({component_[f], f});
        std::stable_sort(grouped.begin(), grouped.end());

        size_t i = 0;
        std::vector<uint32_t> group;
        while (i < grouped.size()) {
            int c = grouped[i].first;
            group.clear();
            while (i < grouped.size() && grouped[i].first == c)
                group.push_back(grouped[i++].second);
            if (obs_only && !component_has_obs_[c]) {
                if ((group.size() & 1) && !component_has_boundary_[c])
                    throw std::runtime_error("decode: odd syndrome in a component with unreachable boundary");
                continue;
            }
            match_group(group, result);
        }
        return result;
    }

    // A pairing between two flagged detectors is kept only when it is not
    // dominated by sending both to the boundary; clusters of kept pairings
    // then match independently, which is exact by an exchange argument.
    void match_group(const std::vector<uint32_t>& group, DecodeResult& result) const {
        const int k = static_cast<int>(group.size());
        if (k == 1) {
            match_to_boundary(group[0], result);
            return;
        }
        std::vector<int64_t> bd(k);
        for (int a = 0; a < k; a++) {
            double b = boundary_distance(group[a]);
            bd[a] = std::isfinite(b) ? scaled(b) : kInfCost;
        }

        std::vector<int> parent(k);
        for (int a = 0; a < k; a++)
            parent[a] = a;
        auto find = [&](int x) {
            while (parent[x] != x)
                x = parent[x] = parent[parent[x]];
            return x;
        };
        auto pair_cost = [&](int a, int b) {
            double d = distance(group[a], group[b]);
            return std::isfinite(d) ? scaled(d) : kInfCost;
        };
        for (int a = 0; a < k; a++) {
            for (int b = a + 1; b < k; b++) {
                int64_t d = pair_cost(a, b);
                if (d == kInfCost)
                    continue;
                if (bd[a] != kInfCost && bd[b] != kInfCost && d > bd[a] + bd[b])
                    continue;
                parent[find(a)] = find(b);
            }
        }

        std::vector<std::vector<int>> clusters(k);
        for (int a = 0; a < k; a++)
            clusters[find(a)].push_back(a);
        for (const auto& cluster : clusters)
            if (!cluster.empty())
                match_cluster(group, bd, cluster, result);
    }

    void match_to_boundary(uint32_t det, DecodeResult& result) const {
        double b = boundary_distance(det);
        if (!std::isfinite(b))
            throw std::runtime_error("decode: flagged detector cannot reach the boundary");
        result.weight_scaled += scaled(b);
        result.flips_observable ^= boundary_parity(det);
    }

    void match_pair(uint32_t a, uint32_t b, DecodeResult& result) const {
        result.weight_scaled += scaled(distance(a, b));
        result.flips_observable ^= path_parity(a, b);
    }

    void match_cluster(
        const std::vector<uint32_t>& group, const std::vector<int64_t>& bd, const std::vector<int>& cluster,
        DecodeResult& result) const {
        const int k = static_cast<int>(cluster.size());
        if (k == 1) {
            match_to_boundary(group[cluster[0]], result);
            return;
        }
        auto pair_cost = [&](int i, int j) {
            double d = distance(group[cluster[i]], group[cluster[j]]);
            return std::isfinite(d) ? scaled(d) : kInfCost;
        };
        auto bcost = [&](int i) { return bd[cluster[i]]; };

        if (k == 2) {
            int64_t d = pair_cost(0, 1);
            int64_t bsum = (bcost(0) == kInfCost || bcost(1) == kInfCost) ? kInfCost : bcost(0) + bcost(1);
            if (d == kInfCost && bsum == kInfCost)
                throw std::runtime_error("decode: no perfect matching (boundary unreachable for odd syndrome)");
            if (d != kInfCost && d <= bsum) {
                match_pair(group[cluster[0]], group[cluster[1]], result);
            } else {
                match_to_boundary(group[cluster[0]], result);
                match_to_boundary(group[cluster[1]], result);
            }
            return;
        }

        // When every node can reach the boundary, pairing i-j instead of
        // sending both to the boundary gains bd_i + bd_j - d_ij; a maximum
        // weight (not necessarily perfect) matching over nonnegative gains
        // is exactly the minimum-cost pairing. Unreachable boundaries fall
        // back to the virtual-partner construction.
        bool all_boundary = true;
        for (int i = 0; i < k; i++)
            all_boundary = all_boundary && bcost(i) != kInfCost;

        if (all_boundary) {
            std::vector<MatchEdge> edges;
            for (int i = 0; i < k; i++) {
                for (int j = i + 1; j < k; j++) {
                    int64_t d = pair_cost(i, j);
                    if (d == kInfCost)
                        continue;
                    int64_t gain = bcost(i) + bcost(j) - d;
                    if (gain >= 0)
                        edges.push_back({i, j, gain});
                }
            }
            std::vector<int> mate = max_weight_matching(k, edges, false);
            for (int i = 0; i < k; i++) {
                if (mate[i] < 0)
                    match_to_boundary(group[cluster[i]], result);
                else if (mate[i] > i)
                    match_pair(group[cluster[i]], group[cluster[mate[i]]], result);
            }
            return;
        }

        std::vector<MatchEdge> edges;
        std::vector<int64_t> wcost;
        int64_t wmax = 0;
        auto push = [&](int a, int b, int64_t cost) {
            edges.push_back({a, b, cost});
            wcost.push_back(cost);
            wmax = std::max(wmax, cost);
        };
        for (int i = 0; i < k; i++) {
            for (int j = i + 1; j < k; j++) {
                int64_t d = pair_cost(i, j);
                if (d == kInfCost)
                    continue;
                if (bcost(i) != kInfCost && bcost(j) != kInfCost && d > bcost(i) + bcost(j))
                    continue;
                push(i, j, d);
            }
            if (bcost(i) != kInfCost)
                push(i, k + i, bcost(i));
        }
        for (int i = 0; i < k; i++)
            for (int j = i + 1; j < k; j++)
                push(k + i, k + j, 0);

        // Minimize by maximizing (wmax - cost).
        for (size_t e = 0; e < edges.size(); e++)
            edges[e].weight = wmax - wcost[e];
        std::vector<int> mate = max_weight_matching(2 * k, edges);
        for (int v = 0; v < 2 * k; v++)
            if (mate[v] < 0)
                throw std::runtime_error("decode: no perfect matching (boundary unreachable for odd syndrome)");
        for (int i = 0; i < k; i++) {
            int m = mate[i];
            if (m == k + i)
                match_to_boundary(group[cluster[i]], result);
            else if (m > i && m < k)
                match_pair(group[cluster[i]], group[cluster[m]], result);
            else if (m >= k && m != k + i)
                throw std::logic_error("decode: real node matched to a foreign virtual partner");
        }
    }

    static constexpr int64_t kInfCost = std::numeric_limits<int64_t>::max() / 8;

    static int64_t scaled(double w) {
        return static_cast<int64_t>(std::llround(w * static_cast<double>(kWeightScale)));
    }

    int n_;
    int n_components_ = 0;
    std::vector<int> component_;
    std::vector<bool> component_has_obs_;
    std::vector<bool> component_has_boundary_;
    std::vector<std::pair<float, bool>> boundary_edge_;
    std::vector<float> dist_;
    BitVec parity_;
    std::vector<float> boundary_dist_;
    BitVec boundary_parity_;
};

/// Decodes a sampled batch: per-shot observable predictions plus the
/// logical error rate (prediction vs recorded observable).
struct BatchDecodeResult {
    BitVec predictions;
    LerEstimate ler;
};

inline BatchDecodeResult decode_batch(const PreparedDecoder& decoder, const ShotBatch& batch, int workers = 1) {
    BatchDecodeResult out;
    out.predictions = BitVec(batch.n_shots);
    std::atomic<uint64_t> n_fails{0};
    std::atomic<uint64_t> next_chunk{0};
    const uint64_t chunk = 1024;
    const uint64_t n_chunks = (batch.n_shots + chunk - 1) / chunk;

    auto work = [&] {
        uint64_t local_fails = 0;
        for (;;) {
            uint64_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks)
                break;
            uint64_t begin = c * chunk, end = std::min<uint64_t>(batch.n_shots, (c + 1) * chunk);
            for (uint64_t s = begin; s < end; s++) {
                bool pred = decoder.decode_observable(batch.fired_detectors(s));
                if (pred)
                    out.predictions.set(s, true);
                if (pred != batch.observable(s))
                    local_fails++;
            }
        }
        n_fails += local_fails;
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < workers; t++)
            threads.emplace_back(work);
        for (auto& th : threads)
            th.join();
    }
    out.ler = ler_from_counts(n_fails.load(), batch.n_shots);
    return out;
}

inline LerEstimate estimate_ler(const PreparedDecoder& decoder, const ShotBatch& batch, int workers = 1) {
    return decode_batch(decoder, batch, workers).ler;
}

/// Fused sample-and-decode: shots stream through in chunks without storing
/// the full batch. Bit-identical fail counts for any worker count.
inline LerEstimate sample_and_decode(
    const FrameSampler& sampler, const PreparedDecoder& decoder, uint64_t n_shots, uint64_t seed, int workers = 1) {
    std::atomic<uint64_t> n_fails{0};
    std::atomic<uint64_t> next_chunk{0};
    const uint64_t chunk = 1024;
    const uint64_t n_chunks = (n_shots + chunk - 1) / chunk;
    const size_t words = words_for_bits(sampler.circuit().num_detectors());

    auto work = [&] {
        FrameSampler::Workspace ws = sampler.make_workspace();
        std::vector<uint64_t> row(words);
        std::vector<uint32_t> fired;
        uint64_t local_fails = 0;
        for (;;) {
            uint64_t c = next_chunk.fetch_add(1);
            if (c >= n_chunks)
                break;
            uint64_t begin = c * chunk, end = std::min<uint64_t>(n_shots, (c + 1) * chunk);
            for (uint64_t s = begin; s < end; s++) {
                bool obs = false;
                sampler.sample_shot(seed, s, ws, row.data(), obs);
                fired.clear();
                for (size_t w = 0; w < words; w++) {
                    uint64_t bits = row[w];
                    while (bits) {
                        fired.push_back(static_cast<uint32_t>((w << 6) + std::countr_zero(bits)));
                        bits &= bits - 1;
                    }
                }
                if (decoder.decode_observable(fired) != obs)
                    local_fails++;
            }
        }
        n_fails += local_fails;
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < workers; t++)
            threads.emplace_back(work);
        for (auto& th : threads)
            th.join();
    }
    return ler_from_counts(n_fails.load(), n_shots);
}

inline LerEstimate sample_and_decode(
    const NoisyCircuit& noisy, const PreparedDecoder& decoder, uint64_t n_shots, uint64_t seed, int workers = 1) {
    FrameSampler sampler(noisy);
    return sample_and_decode(sampler, decoder, n_shots, seed, workers);
}

}  // namespace dextra

#endif
