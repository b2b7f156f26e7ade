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

#ifndef DEXTRA_BLOSSOM_HPP
#define DEXTRA_BLOSSOM_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dextra {

struct MatchEdge {
    int u;
    int v;
    int64_t weight;
};

/// Maximum-weight maximum-cardinality matching on a general graph
/// (primal-dual blossom algorithm, Galil's formulation). Integer weights
/// keep all dual variables exact. Returns mate[v] = partner or -1.
class MaxWeightMatching {
   public:
    MaxWeightMatching(int n_vertices, const std::vector<MatchEdge>& edge_list, bool max_cardinality = true)
        : nvertex(n_vertices), maxcardinality(max_cardinality), edges(edge_list) {
        for (const auto& e : edges) {
            if (e.u < 0 || e.u >= nvertex || e.v < 0 || e.v >= nvertex || e.u == e.v)
                throw std::invalid_argument("matching: bad edge endpoints");
            // Duals stay integral when all weights are even.
            if (e.weight > std::numeric_limits<int64_t>::max() / 4)
                throw std::invalid_argument("matching: weight overflow");
        }
    }

    std::vector<int> solve() {
        const int n = nvertex;
        if (n == 0)
            return {};
        int64_t maxweight = 0;
        for (const auto& e : edges)
            maxweight = std::max(maxweight, 2 * e.weight);

        int nedge = static_cast<int>(edges.size());
        endpoint.resize(2 * nedge);
        for (int k = 0; k < nedge; k++) {
            endpoint[2 * k] = edges[k].u;
            endpoint[2 * k + 1] = edges[k].v;
        }
        neighbend.assign(n, {});
        for (int k = 0; k < nedge; k++) {
            neighbend[edges[k].u].push_back(2 * k + 1);
            neighbend[edges[k].v].push_back(2 * k);
        }

        mate.assign(n, -1);
        label.assign(2 * n, 0);
        labelend.assign(2 * n, -1);
        inblossom.resize(n);
        for (int v = 0; v < n; v++)
            inblossom[v] = v;
        blossomparent.assign(2 * n, -1);
        blossomchilds.assign(2 * n, {});
        blossombase.resize(2 * n);
        for (int v = 0; v < n; v++)
            blossombase[v] = v;
        for (int b = n; b < 2 * n; b++)
            blossombase[b] = -1;
        blossomendps.assign(2 * n, {});
        bestedge.assign(2 * n, -1);
        blossombestedges.assign(2 * n, {});
        unusedblossoms.clear();
        for (int b = n; b < 2 * n; b++)
            unusedblossoms.push_back(b);
        dualvar.assign(2 * n, 0);
        for (int v = 0; v < n; v++)
            dualvar[v] = maxweight;
        allowedge.assign(nedge, false);
        queue.clear();

        for (int t = 0; t < n; t++) {
            std::fill(label.begin(), label.end(), 0);
            std::fill(bestedge.begin(), bestedge.end(), -1);
            for (int b = n; b < 2 * n; b++)
                blossombestedges[b].clear();
            std::fill(allowedge.begin(), allowedge.end(), false);
            queue.clear();

            for (int v = 0; v < n; v++)
                if (mate[v] == -1 && label[inblossom[v]] == 0)
                    assign_label(v, 1, -1);

            bool augmented = false;
            for (;;) {
                while (!queue.empty() && !augmented) {
                    int v = queue.back();
                    queue.pop_back();
                    for (int p : neighbend[v]) {
                        int k = p / 2;
                        int w = endpoint[p];
                        if (inblossom[v] == inblossom[w])
                            continue;
                        int64_t kslack = 0;
                        if (!allowedge[k]) {
                            kslack = slack(k);
                            if (kslack <= 0)
                                allowedge[k] = true;
                        }
                        if (allowedge[k]) {
                            if (label[inblossom[w]] == 0) {
                                assign_label(w, 2, p ^ 1);
                            } else if (label[inblossom[w]] == 1) {
                                int base = scan_blossom(v, w);
                                if (base >= 0)
                                    add_blossom(base, k);
                                else {
                                    augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if (label[w] == 0) {
                                label[w] = 2;
                                labelend[w] = p ^ 1;
                            }
                        } else if (label[inblossom[w]] == 1) {
                            int b = inblossom[v];
                            if (bestedge[b] == -1 || kslack < slack(bestedge[b]))
                                bestedge[b] = k;
                        } else if (label[w] == 0) {
                            if (bestedge[w] == -1 || kslack < slack(bestedge[w]))
                                bestedge[w] = k;
                        }
                    }
                }
                if (augmented)
                    break;

                // Delta step: all duals move by the tightest constraint.
                int deltatype = -1;
                int64_t delta = 0;
                int deltaedge = -1, deltablossom = -1;

                if (!maxcardinality) {
                    deltatype = 1;
                    int64_t mindual = std::numeric_limits<int64_t>::max();
                    for (int v = 0; v < n; v++)
                        mindual = std::min(mindual, dualvar[v]);
                    delta = std::max<int64_t>(0, mindual);
                }
                for (int v = 0; v < n; v++) {
                    if (label[inblossom[v]] == 0 && bestedge[v] != -1) {
                        int64_t d = slack(bestedge[v]);
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 2;
                            deltaedge = bestedge[v];
                        }
                    }
                }
                for (int b = 0; b < 2 * n; b++) {
                    if (blossomparent[b] == -1 && label[b] == 1 && bestedge[b] != -1) {
                        int64_t kslack = slack(bestedge[b]);
                        int64_t d = kslack / 2;
                        if (deltatype == -1 || d < delta) {
                            delta = d;
                            deltatype = 3;
                            deltaedge = bestedge[b];
                        }
                    }
                }
                for (int b = n; b < 2 * n; b++) {
                    if (blossombase[b] >= 0 && blossomparent[b] == -1 && label[b] == 2 &&
                        (deltatype == -1 || dualvar[b] < delta)) {
                        delta = dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if (deltatype == -1) {
                    // No further progress possible (maximum cardinality
                    // reached); clamp the duals and stop the stage.
                    deltatype = 1;
                    int64_t mindual = std::numeric_limits<int64_t>::max();
                    for (int v = 0; v < n; v++)
                        mindual = std::min(mindual, dualvar[v]);
                    delta = std::max<int64_t>(0, mindual);
                }

                for (int v = 0; v < n; v++) {
                    int lbl = label[inblossom[v]];
                    if (lbl == 1)
                        dualvar[v] -= delta;
                    else if (lbl == 2)
                        dualvar[v] += delta;
                }
                for (int b = n; b < 2 * n; b++) {
                    if (blossombase[b] >= 0 && blossomparent[b] == -1) {
                        if (label[b] == 1)
                            dualvar[b] += delta;
                        else if (label[b] == 2)
                            dualvar[b] -= delta;
                    }
                }

                if (deltatype == 1)
                    break;
                if (deltatype == 2) {
                    allowedge[deltaedge] = true;
                    int i = endpoint[2 * deltaedge];
                    if (label[inblossom[i]] == 0)
                        i = endpoint[2 * deltaedge + 1];
                    queue.push_back(i);
                } else if (deltatype == 3) {
                    allowedge[deltaedge] = true;
                    queue.push_back(endpoint[2 * deltaedge]);
                } else if (deltatype == 4) {
                    expand_blossom(deltablossom, false);
                }
            }
            if (!augmented)
                break;

            for (int b = n; b < 2 * n; b++)
                if (blossombase[b] >= 0 && blossomparent[b] == -1 && label[b] == 1 && dualvar[b] == 0)
                    expand_blossom(b, true);
        }

        std::vector<int> result(n, -1);
        for (int v = 0; v < n; v++)
            if (mate[v] >= 0)
                result[v] = endpoint[mate[v]];
        return result;
    }

   private:
    int64_t slack(int k) const {
        return dualvar[edges[k].u] + dualvar[edges[k].v] - 2 * edges[k].weight;
    }

    void blossom_leaves(int b, std::vector<int>& out) const {
        if (b < nvertex) {
            out.push_back(b);
            return;
        }
        for (int child : blossomchilds[b])
            blossom_leaves(child, out);
    }

    void assign_label(int w, int t, int p) {
        int b = inblossom[w];
        label[w] = label[b] = t;
        labelend[w] = labelend[b] = p;
        bestedge[w] = bestedge[b] = -1;
        if (t == 1) {
            std::vector<int> leaves;
            blossom_leaves(b, leaves);
            for (int v : leaves)
                queue.push_back(v);
        } else if (t == 2) {
            int base = blossombase[b];
            if (mate[base] < 0)
                throw std::logic_error("matching: T-blossom base is unmatched");
            assign_label(endpoint[mate[base]], 1, mate[base] ^ 1);
        }
    }

    int scan_blossom(int v, int w) {
        std::vector<int> path;
        int base = -1;
        while (v != -1 || w != -1) {
            int b = inblossom[v];
            if (label[b] & 4) {
                base = blossombase[b];
                break;
            }
            path.push_back(b);
            label[b] = label[b] | 4;
            if (labelend[b] == -1) {
                v = -1;
            } else {
                v = endpoint[labelend[b]];
                b = inblossom[v];
                v = endpoint[labelend[b]];
            }
            if (w != -1)
                std::swap(v, w);
        }
        for (int b : path)
            label[b] = label[b] & ~4;
        return base;
    }

    void add_blossom(int base, int k) {
        int v = edges[k].u, w = edges[k].v;
        int bb = inblossom[base];
        int bv = inblossom[v];
        int bw = inblossom[w];
        int b = unusedblossoms.back();
        unusedblossoms.pop_back();
        blossombase[b] = base;
        blossomparent[b] = -1;
        blossomparent[bb] = b;
        std::vector<int>& path = blossomchilds[b];
        std::vector<int>& endps = blossomendps[b];
        path.clear();
        endps.clear();
        while (bv != bb) {
            blossomparent[bv] = b;
            path.push_back(bv);
            endps.push_back(labelend[bv]);
            v = endpoint[labelend[bv]];
            bv = inblossom[v];
        }
        path.push_back(bb);
        std::reverse(path.begin(), path.end());
        std::reverse(endps.begin(), endps.end());
        endps.push_back(2 * k);
        while (bw != bb) {
            blossomparent[bw] = b;
            path.push_back(bw);
            endps.push_back(labelend[bw] ^ 1);
            w = endpoint[labelend[bw]];
            bw = inblossom[w];
        }
        label[b] = 1;
        labelend[b] = labelend[bb];
        dualvar[b] = 0;
        std::vector<int> leaves;
        blossom_leaves(b, leaves);
        for (int leaf : leaves) {
            if (label[inblossom[leaf]] == 2)
                queue.push_back(leaf);
            inblossom[leaf] = b;
        }
        // Best-edge lists for future delta3 computations.
        std::vector<int> bestedgeto(2 * nvertex, -1);
        for (int bv2 : path) {
            std::vector<std::vector<int>> nblists;
            if (blossombestedges[bv2].empty()) {
                std::vector<int> bleaves;
                blossom_leaves(bv2, bleaves);
                nblists.reserve(bleaves.size());
                for (int leaf : bleaves) {
                    nblists.emplace_back();
                    for (int p : neighbend[leaf])
                        nblists.back().push_back(p / 2);
                }
            } else {
                nblists.push_back(blossombestedges[bv2]);
            }
            for (const auto& nblist : nblists) {
                for (int k2 : nblist) {
                    int i = edges[k2].u, j = edges[k2].v;
                    if (inblossom[j] == b)
                        std::swap(i, j);
                    int bj = inblossom[j];
                    if (bj != b && label[bj] == 1 &&
                        (bestedgeto[bj] == -1 || slack(k2) < slack(bestedgeto[bj])))
                        bestedgeto[bj] = k2;
                }
            }
            blossombestedges[bv2].clear();
            bestedge[bv2] = -1;
        }
        blossombestedges[b].clear();
        for (int k2 : bestedgeto)
            if (k2 != -1)
                blossombestedges[b].push_back(k2);
        bestedge[b] = -1;
        for (int k2 : blossombestedges[b])
            if (bestedge[b] == -1 || slack(k2) < slack(bestedge[b]))
                bestedge[b] = k2;
    }

    void expand_blossom(int b, bool endstage) {
        for (int s : blossomchilds[b]) {
            blossomparent[s] = -1;
            if (s < nvertex) {
                inblossom[s] = s;
            } else if (endstage && dualvar[s] == 0) {
                expand_blossom(s, endstage);
            } else {
                std::vector<int> leaves;
                blossom_leaves(s, leaves);
                for (int leaf : leaves)
                    inblossom[leaf] = s;
            }
        }
        if (!endstage && label[b] == 2) {
            // Relabel the even-length half of the expanded T-blossom's path
            // and leave the other half unlabeled for later scans.
            const int nchild = static_cast<int>(blossomchilds[b].size());
            auto child_at = [&](int j) { return blossomchilds[b][(j % nchild + nchild) % nchild]; };
            auto endp_at = [&](int j) { return blossomendps[b][(j % nchild + nchild) % nchild]; };

            int entrychild = inblossom[endpoint[labelend[b] ^ 1]];
            int j = 0;
            while (blossomchilds[b][j] != entrychild)
                j++;
            int jstep, endptrick;
            if (j & 1) {
                j -= nchild;
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            int p = labelend[b];
            while (j != 0) {
                label[endpoint[p ^ 1]] = 0;
                label[endpoint[endp_at(j - endptrick) ^ endptrick ^ 1]] = 0;
                assign_label(endpoint[p ^ 1], 2, p);
                allowedge[endp_at(j - endptrick) / 2] = true;
                j += jstep;
                p = endp_at(j - endptrick) ^ endptrick;
                allowedge[p / 2] = true;
                j += jstep;
            }
            int bv = child_at(j);
            label[endpoint[p ^ 1]] = label[bv] = 2;
            labelend[endpoint[p ^ 1]] = labelend[bv] = p;
            bestedge[bv] = -1;
            j += jstep;
            while (child_at(j) != entrychild) {
                int bw = child_at(j);
                if (label[bw] == 1) {
                    j += jstep;
                    continue;
                }
                std::vector<int> leaves;
                blossom_leaves(bw, leaves);
                int v = -1;
                for (int leaf : leaves) {
                    if (label[leaf] != 0) {
                        v = leaf;
                        break;
                    }
                }
                if (v >= 0) {
                    if (label[v] != 2 || inblossom[v] != bw)
                        throw std::logic_error("matching: unexpected label inside expanded blossom");
                    label[v] = 0;
                    label[endpoint[mate[blossombase[bw]]]] = 0;
                    assign_label(v, 2, labelend[v]);
                }
                j += jstep;
            }
        }
        label[b] = 0;
        labelend[b] = -1;
        blossomchilds[b].clear();
        blossomendps[b].clear();
        blossombase[b] = -1;
        blossombestedges[b].clear();
        bestedge[b] = -1;
        unusedblossoms.push_back(b);
    }

    void augment_blossom(int b, int v) {
        int t = v;
        while (blossomparent[t] != b)
            t = blossomparent[t];
        if (t >= nvertex)
            augment_blossom(t, v);
        const int nchild = static_cast<int>(blossomchilds[b].size());
        auto child_at = [&](int j) { return blossomchilds[b][(j % nchild + nchild) % nchild]; };
        auto endp_at = [&](int j) { return blossomendps[b][(j % nchild + nchild) % nchild]; };

        int i = 0;
        while (blossomchilds[b][i] != t)
            i++;
        int j = i;
        int jstep, endptrick;
        if (j & 1) {
            j -= nchild;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while (j != 0) {
            j += jstep;
            int tc = child_at(j);
            int p = endp_at(j - endptrick) ^ endptrick;
            if (tc >= nvertex)
                augment_blossom(tc, endpoint[p]);
            j += jstep;
            tc = child_at(j);
            if (tc >= nvertex)
                augment_blossom(tc, endpoint[p ^ 1]);
            mate[endpoint[p]] = p ^ 1;
            mate[endpoint[p ^ 1]] = p;
        }
        std::rotate(blossomchilds[b].begin(), blossomchilds[b].begin() + i, blossomchilds[b].end());
        std::rotate(blossomendps[b].begin(), blossomendps[b].begin() + i, blossomendps[b].end());
        blossombase[b] = blossombase[blossomchilds[b][0]];
        if (blossombase[b] != v)
            throw std::logic_error("matching: blossom base did not rotate to the augmenting vertex");
    }

    void augment_matching(int k) {
        for (auto [s, p] : {std::pair{edges[k].u, 2 * k + 1}, std::pair{edges[k].v, 2 * k}}) {
            for (;;) {
                int bs = inblossom[s];
                if (label[bs] != 1)
                    throw std::logic_error("matching: augmenting path leaves the tree");
                int bs_labelend = labelend[bs];
                if (bs >= nvertex)
                    augment_blossom(bs, s);
                mate[s] = p;
                if (bs_labelend == -1)
                    break;
                int t = endpoint[bs_labelend];
                int bt = inblossom[t];
                if (label[bt] != 2)
                    throw std::logic_error("matching: broken alternating path");
                if (blossombase[bt] != t)
                    throw std::logic_error("matching: T-blossom base mismatch");
                int s_next = endpoint[labelend[bt]];
                int j = endpoint[labelend[bt] ^ 1];
                if (bt >= nvertex)
                    augment_blossom(bt, j);
                mate[j] = labelend[bt];
                p = labelend[bt] ^ 1;
                s = s_next;
            }
        }
    }

    int nvertex;
    bool maxcardinality = true;
    std::vector<MatchEdge> edges;
    std::vector<int> endpoint;
    std::vector<std::vector<int>> neighbend;
    std::vector<int> mate;
    std::vector<int> label;
    std::vector<int> labelend;
    std::vector<int> inblossom;
    std::vector<int> blossomparent;
    std::vector<std::vector<int>> blossomchilds;
    std::vector<int> blossombase;
    std::vector<std::vector<int>> blossomendps;
    std::vector<int> bestedge;
    std::vector<std::vector<int>> blossombestedges;
    std::vector<int> unusedblossoms;
    std::vector<int64_t> dualvar;
    std::vector<bool> allowedge;
    std::vector<int> queue;
};

/// Maximum-weight matching; mate[v] = partner or -1. With max_cardinality
/// the matching size is maximized before the weight.
inline std::vector<int> max_weight_matching(
    int n_vertices, const std::vector<MatchEdge>& edges, bool max_cardinality = true) {
    return MaxWeightMatching(n_vertices, edges, max_cardinality).solve();
}

}  // namespace dextra

#endif
