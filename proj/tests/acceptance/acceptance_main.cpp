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

// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// run `acceptance --criterion N` for a single one or `acceptance` for all.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dextra/ev.hpp"
#include "dextra/fit.hpp"
#include "dextra/matching.hpp"
#include "dextra/pipeline.hpp"
#include "dextra/tableau.hpp"

using namespace dextra;

namespace {

int g_workers = 2;

struct CriterionResult {
    bool pass;
    std::string details;
};

// Upper chi-square quantile via the Wilson-Hilferty approximation.
double chi2_critical(double dof, double z) {
    double t = 2.0 / (9.0 * dof);
    double v = 1.0 - t + z * std::sqrt(t);
    return dof * v * v * v;
}

double ler_at(int d, double p, uint64_t shots, uint64_t seed, double sigma = 0.0) {
    SurfaceCodePatch patch = build_patch(d);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 3);
    NoisyCircuit noisy = apply_si1000(circuit, {p, sigma, 17});
    PreparedDecoder decoder(build_matching_graph(noisy));
    return sample_and_decode(noisy, decoder, shots, seed, g_workers).p_l;
}

// --- criterion 1: patch structure -----------------------------------------

CriterionResult criterion_structure() {
    for (int d = 2; d <= 13; d++) {
        SurfaceCodePatch patch = build_patch(d);
        if (patch.num_data() != d * d || patch.num_stabilizers() != d * d - 1 ||
            patch.num_qubits() != 2 * d * d - 1)
            return {false, "qubit counts wrong at d=" + std::to_string(d)};
        if (static_cast<int>(patch.logical_z.size()) != d || static_cast<int>(patch.logical_x.size()) != d)
            return {false, "logical weight wrong at d=" + std::to_string(d)};
        auto overlap = [](const std::vector<int>& a, const std::vector<int>& b) {
            std::set<int> sa(a.begin(), a.end());
            int n = 0;
            for (int q : b)
                n += sa.count(q);
            return n;
        };
        for (const auto& px : patch.plaquettes) {
            if (px.support.size() != 2 && px.support.size() != 4)
                return {false, "bad stabilizer weight at d=" + std::to_string(d)};
            for (const auto& pz : patch.plaquettes)
                if (px.type == StabilizerType::X && pz.type == StabilizerType::Z &&
                    overlap(px.support, pz.support) % 2)
                    return {false, "anticommuting stabilizers at d=" + std::to_string(d)};
            const auto& chain = px.type == StabilizerType::X ? patch.logical_z : patch.logical_x;
            if (overlap(px.support, chain) % 2)
                return {false, "logical anticommutes with a stabilizer at d=" + std::to_string(d)};
        }
        if (overlap(patch.logical_x, patch.logical_z) % 2 == 0)
            return {false, "logical operators commute at d=" + std::to_string(d)};
    }
    if (build_patch(13).num_qubits() != 337)
        return {false, "d=13 qubit count is not 337"};
    return {true, "d=2..13 counts, commutation, logical weights; d=13 uses 337 qubits"};
}

// --- criterion 2: noiseless determinism ------------------------------------

CriterionResult criterion_determinism() {
    uint64_t checked = 0;
    for (int d : {3, 4}) {
        SurfaceCodePatch patch = build_patch(d);
        for (PrepState prep :
             {PrepState::Zp, PrepState::Zm, PrepState::Xp, PrepState::Xm, PrepState::Yp, PrepState::Ym}) {
            for (MeasureBasis basis : {MeasureBasis::Z, MeasureBasis::X, MeasureBasis::Y}) {
                MemoryCircuit circuit = build_memory_circuit(patch, prep, basis, 3);
                NoisyCircuit noiseless = apply_si1000(circuit, {0.0, 0.0, 0});
                uint64_t shots = d == 3 ? 10000 : 2000;
                ShotBatch batch = sample_shots(noiseless, shots, 1234, g_workers);
                for (uint64_t s = 0; s < batch.n_shots; s++)
                    if (!batch.fired_detectors(s).empty())
                        return {false,
                                std::string("detector fired at p=0 for ") + prep_state_name(prep) + "/" +
                                    measure_basis_name(basis) + " d=" + std::to_string(d)};
                checked += shots;
            }
        }
    }
    return {true, "all 18 basis pairs at d=3 (1e4 shots) and d=4: zero detectors, " +
                      std::to_string(checked) + " shots total"};
}

// --- criterion 3: frame sampler vs tableau oracle --------------------------

CriterionResult criterion_oracle() {
    std::ostringstream detail;
    for (double p : {0.005, 0.02}) {
        const uint64_t n = 100000;
        SurfaceCodePatch patch = build_patch(3);
        MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 3);
        NoisyCircuit noisy = apply_si1000(circuit, {p, 0.0, 5});
        ShotBatch frame = sample_shots(noisy, n, 101, g_workers);
        ShotBatch oracle = tableau_simulate(noisy, n, 202);

        double chi2 = 0.0;
        int dof = 0;
        auto add_cell = [&](uint64_t a, uint64_t b) {
            if (a + b < 10)
                return;
            double pooled = static_cast<double>(a + b) / (2.0 * n);
            double var = 2.0 * pooled * (1.0 - pooled) / static_cast<double>(n);
            double diff = (static_cast<double>(a) - static_cast<double>(b)) / static_cast<double>(n);
            chi2 += diff * diff / var;
            dof++;
        };
        for (uint32_t k = 0; k < frame.n_detectors; k++) {
            uint64_t a = 0, b = 0;
            for (uint64_t s = 0; s < n; s++) {
                a += frame.detector(s, k);
                b += oracle.detector(s, k);
            }
            add_cell(a, b);
        }
        uint64_t oa = 0, ob = 0;
        for (uint64_t s = 0; s < n; s++) {
            oa += frame.observable(s);
            ob += oracle.observable(s);
        }
        add_cell(oa, ob);
        double crit = chi2_critical(dof, 3.0902);  // alpha = 1e-3
        detail << "p=" << p << ": chi2=" << chi2 << " dof=" << dof << " crit=" << crit << "; ";
        if (chi2 > crit)
            return {false, detail.str() + "rejected"};
    }
    return {true, detail.str() + "not rejected at alpha=1e-3"};
}

// --- criterion 4: DEM vs sampler symptoms, exhaustive -----------------------

CriterionResult criterion_dem_consistency() {
    SurfaceCodePatch patch = build_patch(3);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 3);
    NoisyCircuit noisy = apply_si1000(circuit, {0.004, 0.0, 5});
    FrameSampler sampler(noisy);
    auto mechanisms = extract_dem(noisy);

    std::set<std::pair<std::vector<uint32_t>, bool>> dem_symptoms;
    for (const auto& m : mechanisms)
        dem_symptoms.insert({m.detectors, m.flips_observable});

    uint64_t n_terms = 0, n_nontrivial = 0;
    for (const NoiseChannel& ch : noisy.channels) {
        std::vector<std::pair<SparsePauli, bool>> faults;  // bool: record flip
        switch (ch.kind) {
            case ChannelKind::depolarize1:
                for (char c : {'X', 'Y', 'Z'})
                    faults.push_back({{ch.q0, c, -1, 'I'}, false});
                break;
            case ChannelKind::depolarize2:
                for (int t = 1; t < 16; t++)
                    faults.push_back({{ch.q0, "IXYZ"[t >> 2], ch.q1, "IXYZ"[t & 3]}, false});
                break;
            case ChannelKind::x_flip:
                faults.push_back({{ch.q0, 'X', -1, 'I'}, false});
                break;
            case ChannelKind::measurement_flip:
                faults.push_back({{-1, 'I', -1, 'I'}, true});
                break;
        }
        for (const auto& [fault, is_record] : faults) {
            n_terms++;
            auto [dets, obs] = is_record ? sampler.record_flip_symptom(ch.record)
                                         : sampler.single_fault_symptom(static_cast<size_t>(ch.instr_index), fault);
            if (dets.empty() && !obs)
                continue;
            n_nontrivial++;
            if (!dem_symptoms.count({dets, obs})) {
                std::ostringstream msg;
                msg << "sampler symptom missing from DEM at instr " << ch.instr_index << ":";
                for (uint32_t d : dets)
                    msg << " D" << d;
                if (obs)
                    msg << " L0";
                return {false, msg.str()};
            }
        }
    }
    // Every mechanism must also be reachable from some fault, which the
    // construction guarantees; spot-check the counts.
    std::ostringstream detail;
    detail << n_terms << " fault terms (" << n_nontrivial << " nontrivial) across " << noisy.channels.size()
           << " channels all match the " << mechanisms.size() << " DEM mechanisms bit-identically";
    return {true, detail.str()};
}

// --- criterion 5: blossom equals brute force --------------------------------

CriterionResult criterion_decoder_exact() {
    SurfaceCodePatch patch = build_patch(3);
    MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 3);
    NoisyCircuit noisy = apply_si1000(circuit, {0.004, 0.0, 17});
    PreparedDecoder decoder(build_matching_graph(noisy));

    // Exhaustive minimum over pairings with boundary options, on the
    // decoder's own scaled costs.
    std::function<int64_t(std::vector<uint32_t>&, std::vector<bool>&, int64_t)> best_cost =
        [&](std::vector<uint32_t>& nodes, std::vector<bool>& used, int64_t acc) -> int64_t {
        size_t i = 0;
        while (i < nodes.size() && used[i])
            i++;
        if (i == nodes.size())
            return acc;
        int64_t best = std::numeric_limits<int64_t>::max();
        used[i] = true;
        double bd = decoder.boundary_distance(nodes[i]);
        if (std::isfinite(bd))
            best = std::min(
                best,
                best_cost(nodes, used, acc + std::llround(bd * PreparedDecoder::kWeightScale)));
        for (size_t j = i + 1; j < nodes.size(); j++) {
            if (used[j])
                continue;
            double dst = decoder.distance(nodes[i], nodes[j]);
            if (!std::isfinite(dst))
                continue;
            used[j] = true;
            best = std::min(
                best, best_cost(nodes, used, acc + std::llround(dst * PreparedDecoder::kWeightScale)));
            used[j] = false;
        }
        used[i] = false;
        return best;
    };

    Xoshiro256 rng(909, 0);
    for (int trial = 0; trial < 1000; trial++) {
        int k = 1 + static_cast<int>(rng.below(8));
        std::vector<uint32_t> fired;
        while (static_cast<int>(fired.size()) < k) {
            uint32_t v = static_cast<uint32_t>(rng.below(decoder.n_detectors()));
            if (std::find(fired.begin(), fired.end(), v) == fired.end())
                fired.push_back(v);
        }
        std::sort(fired.begin(), fired.end());
        DecodeResult got = decoder.decode_shot(fired);
        std::vector<bool> used(fired.size(), false);
        int64_t want = best_cost(fired, used, 0);
        if (got.weight_scaled != want) {
            std::ostringstream msg;
            msg << "trial " << trial << ": blossom weight " << got.weight_scaled << " != brute force " << want;
            return {false, msg.str()};
        }
    }
    return {true, "1000 random syndromes with <= 8 flagged detectors: matching weight equals brute force exactly"};
}

// --- criterion 6: threshold crossing ----------------------------------------

CriterionResult criterion_threshold() {
    const std::vector<double> ps{0.003, 0.004, 0.005, 0.006};
    std::map<int, std::vector<double>> ler;
    std::ostringstream detail;
    for (int d : {3, 5, 7}) {
        uint64_t shots = d == 7 ? 100000 : 200000;
        for (double p : ps)
            ler[d].push_back(ler_at(d, p, shots, 4000 + d));
    }
    detail << "LER(3)= ";
    for (double v : ler[3])
        detail << v << " ";
    detail << "LER(5)= ";
    for (double v : ler[5])
        detail << v << " ";
    // Crossing of the d=3 and d=5 curves in log space.
    double crossing = -1.0;
    for (size_t i = 0; i + 1 < ps.size(); i++) {
        double r0 = std::log(ler[5][i] / ler[3][i]);
        double r1 = std::log(ler[5][i + 1] / ler[3][i + 1]);
        if (r0 <= 0.0 && r1 >= 0.0) {
            crossing = ps[i] + (ps[i + 1] - ps[i]) * (-r0) / (r1 - r0);
            break;
        }
    }
    if (crossing < 0.0 && std::log(ler[5][0] / ler[3][0]) > 0.0)
        return {false, detail.str() + "-> d=5 already worse at p=0.003 (threshold below range)"};
    if (crossing < 0.0)
        return {false, detail.str() + "-> no crossing up to p=0.006 (threshold above range)"};
    detail << "-> crossing at p=" << crossing;
    if (crossing < 0.003 || crossing > 0.006)
        return {false, detail.str()};
    return {true, detail.str()};
}

// --- criterion 7: EV formulas and the noiseless T pipeline ------------------

CriterionResult criterion_ev_formulas() {
    if (ev_from_ler(0.0, 0.0, 1).value != 1.0 || ev_from_ler(0.5, 0.0, 1).value != 0.0 ||
        std::abs(ev_from_ler(0.1, 0.0, -1).value + 0.8) > 1e-15)
        return {false, "ev_from_ler is not +-(1 - 2 P_L)"};

    const double s2 = std::sqrt(2.0);
    StabilizerDecomposition dec = decompose_state({1.0, 1.0 / s2, 1.0 / s2, 0.0});
    Eigen::Matrix<double, 6, 1> expected;
    expected << s2 / 2.0, 0.0, 0.5, (1.0 - s2) / 2.0, 0.0, 0.0;
    double l1 = (dec.x - expected).cwiseAbs().sum();
    if (l1 > 1e-6)
        return {false, "T decomposition L1 distance " + std::to_string(l1)};

    // Noiseless pipeline: six components at 1e5 shots each.
    ExperimentConfig config;
    config.distances = {3};
    config.cutoff_d = 3;
    config.p_values = {0.0};
    config.shots_per_point = {100000};
    config.input_state = "T";
    config.observable = 'X';
    config.method = "decomposition";
    config.bootstrap_trials = 0;
    config.ansatz = "single_exp";
    config.seed = 77;
    config.workers = g_workers;
    config.persist_shots = false;
    config.rounds_factor = 3;

    // A one-distance series cannot be fit; run the components directly.
    SurfaceCodePatch patch = build_patch(3);
    NoiseParams noise{0.0, 0.0, 0};
    PreparedDecoder decoder(dem_for_measurement(patch, MeasureBasis::X, 3, noise));
    std::array<EVEstimate, 6> comps;
    for (int i = 0; i < 6; i++) {
        comps[i] = run_memory_experiment(
            patch, kStabilizerBasis[i], MeasureBasis::X, decoder, 3, noise, 100000, 555 + i, g_workers);
        comps[i].observable = "X";
        comps[i].d = 3;
        comps[i].p = 0.0;
    }
    EVEstimate combined = combine_evs(dec, comps);
    double target = s2 / 2.0;
    double sigma = std::max(combined.std_err, 1e-12);
    std::ostringstream detail;
    detail << "T decomposition L1=" << l1 << "; noiseless pipeline EV=" << combined.value << " +- "
           << combined.std_err << " vs sqrt(2)/2=" << target;
    if (std::abs(combined.value - target) > 3.0 * sigma)
        return {false, detail.str()};
    return {true, detail.str()};
}

// --- criterion 8: distance extrapolation beats the cutoff experiment --------

CriterionResult criterion_ide_improvement() {
    const double p = 0.003;
    const std::vector<int> ds{3, 5, 7, 9};
    const uint64_t shots = 1000000;

    // Graphs and reference circuits are rep-independent.
    struct Ctx {
        NoisyCircuit noisy;
        std::unique_ptr<PreparedDecoder> decoder;
        std::unique_ptr<FrameSampler> sampler;
    };
    std::vector<Ctx> ctx;
    for (int d : ds) {
        SurfaceCodePatch patch = build_patch(d);
        MemoryCircuit circuit = build_memory_circuit(patch, PrepState::Zp, MeasureBasis::Z, 3);
        Ctx c{apply_si1000(circuit, {p, 0.0, 17}), nullptr, nullptr};
        c.decoder = std::make_unique<PreparedDecoder>(build_matching_graph(c.noisy));
        c.sampler = std::make_unique<FrameSampler>(c.noisy);
        ctx.push_back(std::move(c));
    }

    int ir_wins = 0, r2_ok = 0;
    std::ostringstream detail;
    for (int rep = 0; rep < 10; rep++) {
        DataSeries series;
        series.cutoff_d = 9;
        series.parity = ParityFilter::odd;
        for (size_t i = 0; i < ds.size(); i++) {
            LerEstimate ler =
                sample_and_decode(*ctx[i].sampler, *ctx[i].decoder, shots, 100000 + rep * 97 + ds[i], g_workers);
            EVEstimate ev = ev_from_ler(ler, 1);
            series.points.push_back({ds[i], ev.value, ev.std_err, shots});
        }
        FitResult fit = lm_fit(series, Ansatz::single_exp);
        double ir = improvement_ratio(series.points.back().ev, fit.extrapolated, 1.0);
        ir_wins += ir > 1.0;
        r2_ok += fit.r2 >= 0.99;
        detail << "rep" << rep << ": IR=" << ir << " R2=" << fit.r2 << "; ";
    }
    detail << "-> IR>1 in " << ir_wins << "/10, R2>=0.99 in " << r2_ok << "/10";
    if (ir_wins < 8 || r2_ok < 8)
        return {false, detail.str()};
    return {true, detail.str()};
}

// --- criterion 9: ansatz vs Richardson on synthetic series -------------------

CriterionResult criterion_ansatz_vs_richardson() {
    // Decay rates correspond to per-two-distance suppression ratios between
    // roughly 2 and 7, the memory-experiment regime; shots are desk scale.
    Xoshiro256 rng(2718, 0);
    int ansatz_wins = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; trial++) {
        double a = 0.5 + 0.45 * rng.uniform01();
        double b1 = -(0.05 + 0.3 * rng.uniform01());
        double c1 = 0.4 + 0.6 * rng.uniform01();
        double b2 = -(0.02 + 0.1 * rng.uniform01());
        double c2 = c1 * (1.5 + 1.5 * rng.uniform01());
        DataSeries series;
        series.cutoff_d = 15;
        for (int d : {3, 5, 7, 9, 11, 13, 15}) {
            double y = a + b1 * std::exp(-c1 * d) + b2 * std::exp(-c2 * d);
            uint64_t n = 1000000;
            double q = std::clamp((1.0 - y) / 2.0, 0.0, 1.0);
            double qhat = (n * q + std::sqrt(n * q * (1.0 - q)) * rng.normal()) / static_cast<double>(n);
            qhat = std::clamp(qhat, 0.0, 1.0);
            series.points.push_back(
                {d, 1.0 - 2.0 * qhat, 2.0 * std::sqrt(std::max(qhat * (1.0 - qhat), 1e-12) / n), n});
        }
        double fit_err = std::abs(lm_fit(series, Ansatz::double_exp).extrapolated - a);
        double rich_err = std::abs(richardson_extrapolate(series) - a);
        ansatz_wins += fit_err <= rich_err;
    }
    std::ostringstream detail;
    detail << "exponential ansatz beats Richardson in " << ansatz_wins << "/" << trials << " noisy synthetic series";
    return {ansatz_wins >= 80, detail.str()};
}

// --- criterion 10: robustness to spatial inhomogeneity ----------------------

CriterionResult criterion_inhomogeneity() {
    const double p = 0.003, sigma = 0.3;
    DataSeries series;
    series.cutoff_d = 9;
    series.parity = ParityFilter::odd;
    for (int d : {3, 5, 7, 9}) {
        double ler = ler_at(d, p, 400000, 7000 + d, sigma);
        EVEstimate ev = ev_from_ler(ler, std::sqrt(ler * (1 - ler) / 400000.0), 1, 400000);
        series.points.push_back({d, ev.value, ev.std_err, 400000});
    }
    FitResult fit = lm_fit(series, Ansatz::single_exp);
    std::ostringstream detail;
    detail << "sigma=0.3 at p=0.003, odd d in {3,5,7,9}: R2=" << fit.r2 << " (A=" << fit.extrapolated << ")";
    return {fit.r2 >= 0.98, detail.str()};
}

// --- criterion 11: resource savings table ------------------------------------

CriterionResult criterion_resource_table() {
    struct Row {
        double lambda, f, delta_d, qubit_ratio;
    };
    const Row rows[] = {
        {2, 10, 6.64, 3.02},  {2, 100, 13.29, 6.13},  {2, 1000, 19.93, 10.33},
        {5, 10, 2.86, 1.74},  {5, 100, 5.72, 2.68},   {5, 1000, 8.58, 3.82},
        {10, 10, 2.00, 1.49}, {10, 100, 4.00, 2.09},  {10, 1000, 6.00, 2.78},
    };
    for (const auto& row : rows) {
        ResourceSavings rs = resource_savings(row.lambda, row.f, 9);
        if (std::abs(std::round(rs.delta_d * 100) / 100 - row.delta_d) > 5e-3 ||
            std::abs(std::round(rs.qubit_ratio * 100) / 100 - row.qubit_ratio) > 5e-3) {
            std::ostringstream msg;
            msg << "lambda=" << row.lambda << " f=" << row.f << ": got +" << rs.delta_d << ", /" << rs.qubit_ratio
                << "; want +" << row.delta_d << ", /" << row.qubit_ratio;
            return {false, msg.str()};
        }
    }
    return {true, "all nine (lambda, f) entries match to two decimals, e.g. lambda=2 f=1000 -> +19.93, /10.33"};
}

// --- criterion 12: fitter numerics -------------------------------------------

CriterionResult criterion_numerics() {
    // Jacobian vs fourth-order central differences.
    Xoshiro256 rng(123, 0);
    for (int trial = 0; trial < 100; trial++) {
        detail::ExpModel model{trial % 2 == 0 ? 1 : 2};
        int np = model.n_params();
        Eigen::VectorXd theta(np);
        theta[0] = -0.9 + 1.8 * rng.uniform01();
        for (int t = 0; t < model.n_terms; t++) {
            theta[1 + 2 * t] = -0.5 + rng.uniform01();
            theta[2 + 2 * t] = std::log(0.2 + 1.3 * rng.uniform01());
        }
        double d = 3.0 + 2.0 * static_cast<double>(rng.below(6));
        Eigen::VectorXd analytic(np);
        model.jacobian_row(theta, d, analytic);
        for (int q = 0; q < np; q++) {
            double h = 1e-3 * std::max(1.0, std::abs(theta[q]));
            auto at = [&](double off) {
                Eigen::VectorXd shifted = theta;
                shifted[q] += off;
                return model.evaluate(shifted, d);
            };
            double fd = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12.0 * h);
            double scale = std::max({1e-3, std::abs(fd), std::abs(analytic[q])});
            if (std::abs(analytic[q] - fd) / scale > 1e-6)
                return {false, "jacobian mismatch at trial " + std::to_string(trial)};
        }
    }
    // Exact-model parameter recovery.
    for (int trial = 0; trial < 100; trial++) {
        double a = -0.9 + 1.8 * rng.uniform01();
        double b = -0.5 + rng.uniform01();
        if (std::abs(b) < 0.05)
            b = 0.05;
        double c = 0.2 + 1.3 * rng.uniform01();
        DataSeries s;
        s.cutoff_d = 13;
        for (int d : {3, 5, 7, 9, 11, 13})
            s.points.push_back({d, a + b * std::exp(-c * d), 0.0, 1000000});
        FitResult fit = lm_fit(s, Ansatz::single_exp);
        if (std::abs(fit.A - a) > 1e-6 * std::max(1.0, std::abs(a)) ||
            std::abs(fit.B[0] - b) > 1e-6 * std::max(1.0, std::abs(b)) ||
            std::abs(fit.C[0] - c) > 1e-6 * std::max(1.0, std::abs(c)))
            return {false, "exact recovery failed at trial " + std::to_string(trial)};
    }
    // Richardson constant fixpoint.
    for (int trial = 0; trial < 50; trial++) {
        DataSeries s;
        int d = 2 + static_cast<int>(rng.below(4));
        for (int i = 0; i < 2 + static_cast<int>(rng.below(5)); i++) {
            s.points.push_back({d, -0.3, 0.0, 100});
            d += 1 + static_cast<int>(rng.below(3));
        }
        s.cutoff_d = s.points.back().d;
        if (std::abs(richardson_extrapolate(s) + 0.3) > 1e-9)
            return {false, "richardson constant fixpoint violated"};
    }
    // The extrapolated value never leaves [-1, 1].
    for (int trial = 0; trial < 200; trial++) {
        DataSeries s;
        s.cutoff_d = 11;
        for (int d : {3, 5, 7, 9, 11})
            s.points.push_back({d, std::clamp(0.97 + 0.08 * rng.normal(), -1.0, 1.0), 0.02, 10000});
        FitResult fit = lm_fit(s, Ansatz::single_exp);
        if (fit.A > 1.0 || fit.A < -1.0)
            return {false, "A escaped [-1, 1]"};
    }
    return {true, "jacobian 1e-6, exact recovery 1e-6, richardson fixpoint, A bounded in 400 fits"};
}

struct Criterion {
    int id;
    const char* name;
    CriterionResult (*fn)();
};

const Criterion kCriteria[] = {
    {1, "patch structure", criterion_structure},
    {2, "noiseless determinism", criterion_determinism},
    {3, "sampler/oracle equivalence", criterion_oracle},
    {4, "DEM/sampler consistency", criterion_dem_consistency},
    {5, "decoder exactness", criterion_decoder_exact},
    {6, "threshold location", criterion_threshold},
    {7, "expectation value formulas", criterion_ev_formulas},
    {8, "distance extrapolation improvement", criterion_ide_improvement},
    {9, "ansatz vs Richardson", criterion_ansatz_vs_richardson},
    {10, "spatial inhomogeneity robustness", criterion_inhomogeneity},
    {11, "resource savings table", criterion_resource_table},
    {12, "fitter numerics", criterion_numerics},
};

}  // namespace

int main(int argc, char** argv) {
    int only = -1;
    for (int i = 1; i < argc; i++) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc)
            g_workers = std::atoi(argv[++i]);
    }
    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (only > 0 && c.id != only)
            continue;
        CriterionResult result = c.fn();
        std::printf("[%s] criterion %d: %s — %s\n", result.pass ? "PASS" : "FAIL", c.id, c.name,
                    result.details.c_str());
        std::fflush(stdout);
        failures += !result.pass;
    }
    return failures == 0 ? 0 : 1;
}
