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

#ifndef DEXTRA_PIPELINE_HPP
#define DEXTRA_PIPELINE_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dextra/dem.hpp"
#include "dextra/ev.hpp"
#include "dextra/fit.hpp"
#include "dextra/frame.hpp"
#include "dextra/matching.hpp"
#include "dextra/noise.hpp"

namespace dextra {

struct ExperimentConfig {
    std::vector<int> distances;
    ParityFilter parity = ParityFilter::all;
    int rounds_factor = 3;
    std::vector<double> p_values;
    double inhomogeneity_sigma = 0.0;
    uint64_t noise_seed = 0;
    std::vector<uint64_t> shots_per_point;  // one entry, or one per distance
    std::string input_state = "0";          // 0 1 + - +i -i T xy_plane
    std::vector<double> xy_thetas;
    char observable = 'Z';
    std::string method = "direct";  // direct | decomposition | tomography
    int cutoff_d = 0;
    std::string ansatz = "auto";    // auto | single_exp | double_exp
    int bootstrap_trials = 1000;
    uint64_t seed = 0;
    int workers = 0;  // 0: hardware concurrency
    bool persist_shots = true;
    std::optional<double> true_ev;
    std::vector<double> lambda_factors{2.0, 5.0, 10.0};
    std::vector<double> f_factors{10.0, 100.0, 1000.0};
    int resource_baseline_d = 9;

    int effective_workers() const {
        if (workers > 0)
            return workers;
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }

    uint64_t shots_for_distance_index(size_t idx) const {
        if (shots_per_point.size() == 1)
            return shots_per_point[0];
        return shots_per_point.at(idx);
    }

    void validate() const {
        if (distances.empty())
            throw std::invalid_argument("config: distances must be nonempty");
        for (size_t i = 1; i < distances.size(); i++)
            if (distances[i] <= distances[i - 1])
                throw std::invalid_argument("config: distances must be strictly increasing");
        if (p_values.empty())
            throw std::invalid_argument("config: p_values must be nonempty");
        if (shots_per_point.empty())
            throw std::invalid_argument("config: shots_per_point must be nonempty");
        if (shots_per_point.size() != 1 && shots_per_point.size() != distances.size())
            throw std::invalid_argument("config: shots_per_point must have one entry or one per distance");
        for (uint64_t s : shots_per_point)
            if (s < 1)
                throw std::invalid_argument("config: shots_per_point must be >= 1");
        if (std::find(distances.begin(), distances.end(), cutoff_d) == distances.end())
            throw std::invalid_argument("config: cutoff_d must be one of the distances");
        if (method != "direct" && method != "decomposition" && method != "tomography")
            throw std::invalid_argument("config: unknown method '" + method + "'");
        if (observable != 'X' && observable != 'Y' && observable != 'Z')
            throw std::invalid_argument("config: observable must be X, Y or Z");
        if (rounds_factor < 1)
            throw std::invalid_argument("config: rounds_factor must be >= 1");
        if (input_state == "xy_plane" && xy_thetas.empty())
            throw std::invalid_argument("config: xy_plane needs xy_thetas");
        if (method == "direct" &&
            (input_state == "T" || input_state == "xy_plane"))
            throw std::invalid_argument("config: non-stabilizer input states need decomposition or tomography");
        NoiseParams{p_values[0], inhomogeneity_sigma, noise_seed}.validate();
    }
};

inline ParityFilter parity_from_name(const std::string& s) {
    if (s == "odd")
        return ParityFilter::odd;
    if (s == "even")
        return ParityFilter::even;
    if (s == "all")
        return ParityFilter::all;
    throw std::invalid_argument("config: unknown parity '" + s + "'");
}

inline const char* parity_name(ParityFilter p) {
    switch (p) {
        case ParityFilter::odd: return "odd";
        case ParityFilter::even: return "even";
        case ParityFilter::all: return "all";
    }
    return "?";
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.distances = j.at("distances").get<std::vector<int>>();
    if (j.contains("parity"))
        c.parity = parity_from_name(j.at("parity").get<std::string>());
    if (j.contains("rounds_factor"))
        c.rounds_factor = j.at("rounds_factor").get<int>();
    c.p_values = j.at("p_values").get<std::vector<double>>();
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        if (n.contains("inhomogeneity_sigma"))
            c.inhomogeneity_sigma = n.at("inhomogeneity_sigma").get<double>();
        if (n.contains("seed"))
            c.noise_seed = n.at("seed").get<uint64_t>();
    }
    const auto& shots = j.at("shots_per_point");
    if (shots.is_array())
        c.shots_per_point = shots.get<std::vector<uint64_t>>();
    else
        c.shots_per_point = {shots.get<uint64_t>()};
    if (j.contains("input_state"))
        c.input_state = j.at("input_state").get<std::string>();
    if (j.contains("xy_thetas"))
        c.xy_thetas = j.at("xy_thetas").get<std::vector<double>>();
    if (j.contains("observable"))
        c.observable = j.at("observable").get<std::string>().at(0);
    if (j.contains("method"))
        c.method = j.at("method").get<std::string>();
    c.cutoff_d = j.contains("cutoff_d") ? j.at("cutoff_d").get<int>() : c.distances.back();
    if (j.contains("ansatz"))
        c.ansatz = j.at("ansatz").get<std::string>();
    if (j.contains("bootstrap_trials"))
        c.bootstrap_trials = j.at("bootstrap_trials").get<int>();
    if (j.contains("seed"))
        c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("workers"))
        c.workers = j.at("workers").get<int>();
    if (j.contains("persist_shots"))
        c.persist_shots = j.at("persist_shots").get<bool>();
    if (j.contains("true_ev"))
        c.true_ev = j.at("true_ev").get<double>();
    if (j.contains("lambda_factors"))
        c.lambda_factors = j.at("lambda_factors").get<std::vector<double>>();
    if (j.contains("f_factors"))
        c.f_factors = j.at("f_factors").get<std::vector<double>>();
    if (j.contains("resource_baseline_d"))
        c.resource_baseline_d = j.at("resource_baseline_d").get<int>();
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["distances"] = c.distances;
    j["parity"] = parity_name(c.parity);
    j["rounds_factor"] = c.rounds_factor;
    j["p_values"] = c.p_values;
    j["noise"] = {{"inhomogeneity_sigma", c.inhomogeneity_sigma}, {"seed", c.noise_seed}};
    j["shots_per_point"] = c.shots_per_point;
    j["input_state"] = c.input_state;
    if (!c.xy_thetas.empty())
        j["xy_thetas"] = c.xy_thetas;
    j["observable"] = std::string(1, c.observable);
    j["method"] = c.method;
    j["cutoff_d"] = c.cutoff_d;
    j["ansatz"] = c.ansatz;
    j["bootstrap_trials"] = c.bootstrap_trials;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["persist_shots"] = c.persist_shots;
    if (c.true_ev)
        j["true_ev"] = *c.true_ev;
    j["lambda_factors"] = c.lambda_factors;
    j["f_factors"] = c.f_factors;
    j["resource_baseline_d"] = c.resource_baseline_d;
    return j;
}

/// Hash of the configuration fields that determine simulated data. Worker
/// count and bootstrap trials do not perturb sampled bits.
inline uint64_t config_hash(const ExperimentConfig& c) {
    nlohmann::json j = config_to_json(c);
    j.erase("workers");
    std::string s = j.dump();
    uint64_t h = UINT64_C(0xcbf29ce484222325);
    for (unsigned char ch : s) {
        h ^= ch;
        h *= UINT64_C(0x100000001b3);
    }
    return h;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string p_token(double p) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", p);
    std::string s = buf;
    for (char& c : s)
        if (c == '.')
            c = 'p';
    return s;
}

inline uint64_t subseed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t s = base;
    splitmix64(s);
    s ^= a * UINT64_C(0x9E3779B97F4A7C15);
    splitmix64(s);
    s ^= b * UINT64_C(0xC2B2AE3D27D4EB4F);
    splitmix64(s);
    s ^= c * UINT64_C(0x165667B19E3779F9);
    return splitmix64(s);
}

inline Eigen::Vector4d pauli_targets_for_state(const std::string& name, double theta = 0.0) {
    const double s = 1.0 / std::sqrt(2.0);
    if (name == "0")
        return {1, 0, 0, 1};
    if (name == "1")
        return {1, 0, 0, -1};
    if (name == "+")
        return {1, 1, 0, 0};
    if (name == "-")
        return {1, -1, 0, 0};
    if (name == "+i")
        return {1, 0, 1, 0};
    if (name == "-i")
        return {1, 0, -1, 0};
    if (name == "T")
        return {1, s, s, 0};
    if (name == "xy_plane")
        return xy_plane_target(theta);
    throw std::invalid_argument("unknown input state '" + name + "'");
}

inline PrepState prep_for_stabilizer_state(const std::string& name) {
    if (name == "0")
        return PrepState::Zp;
    if (name == "1")
        return PrepState::Zm;
    if (name == "+")
        return PrepState::Xp;
    if (name == "-")
        return PrepState::Xm;
    if (name == "+i")
        return PrepState::Yp;
    if (name == "-i")
        return PrepState::Ym;
    throw std::invalid_argument("state '" + name + "' is not a stabilizer state");
}

inline std::string stabilizer_state_name(PrepState s) {
    switch (s) {
        case PrepState::Zp: return "0";
        case PrepState::Zm: return "1";
        case PrepState::Xp: return "+";
        case PrepState::Xm: return "-";
        case PrepState::Yp: return "+i";
        case PrepState::Ym: return "-i";
    }
    return "?";
}

}  // namespace detail

/// One memory experiment: prepare `prep`, run rounds_factor*d cycles under
/// SI1000 noise, read out in `basis`, decode with the measurement-basis
/// graph, and convert the logical error rate into an expectation value.
inline EVEstimate run_memory_experiment(
    const SurfaceCodePatch& patch, PrepState prep, MeasureBasis basis, const PreparedDecoder& decoder,
    int rounds_factor, const NoiseParams& noise, uint64_t n_shots, uint64_t seed, int workers) {
    MemoryCircuit circuit = build_memory_circuit(patch, prep, basis, rounds_factor);
    NoisyCircuit noisy = apply_si1000(circuit, noise);
    FrameSampler sampler(noisy);
    LerEstimate ler = sample_and_decode(sampler, decoder, n_shots, seed, workers);
    EVEstimate ev = ev_from_ler(ler, sampler.reference().noiseless_sign());
    ev.state_label = detail::stabilizer_state_name(prep);
    ev.observable = measure_basis_name(basis);
    ev.d = patch.distance;
    ev.p = noise.p;
    return ev;
}

struct TomographyEV {
    EVEstimate combined;
    std::vector<EVEstimate> raw;  // twelve (prep, observable) estimates
    ProcessMatrix chi;
};

/// Method 1: logical process tomography. Twelve (input, observable) memory
/// experiments reconstruct the logical channel, which then evaluates any
/// input state and observable.
inline TomographyEV run_tomography_ev(
    const SurfaceCodePatch& patch, const Eigen::Vector4d& target_b, char observable_out, int rounds_factor,
    const NoiseParams& noise, uint64_t shots_per_run, uint64_t seed, int workers,
    const std::map<MeasureBasis, const PreparedDecoder*>& decoders) {
    const std::array<PrepState, 4> inputs{PrepState::Zp, PrepState::Zm, PrepState::Xp, PrepState::Yp};
    const std::array<MeasureBasis, 3> bases{MeasureBasis::X, MeasureBasis::Y, MeasureBasis::Z};

    TomographyEV out;
    double bloch[4][3];
    double bloch_err[4][3];
    for (size_t i = 0; i < inputs.size(); i++) {
        for (size_t b = 0; b < bases.size(); b++) {
            EVEstimate ev = run_memory_experiment(
                patch, inputs[i], bases[b], *decoders.at(bases[b]), rounds_factor, noise, shots_per_run,
                detail::subseed(seed, 101, i, b), workers);
            bloch[i][b] = ev.value;
            bloch_err[i][b] = ev.std_err;
            out.raw.push_back(ev);
        }
    }

    auto rho = [&](int i) { return state_tomography(bloch[i][0], bloch[i][1], bloch[i][2]); };
    out.chi = process_tomography(rho(0), rho(1), rho(2), rho(3));
    out.combined.value = ev_via_channel(out.chi, target_b, observable_out);

    // The channel output is linear in the twelve inputs away from the Bloch
    // projection; propagate errors by one-at-a-time perturbation.
    double var = 0.0;
    for (int i = 0; i < 4; i++) {
        for (int b = 0; b < 3; b++) {
            double save = bloch[i][b];
            double h = std::max(1e-6, 0.1 * bloch_err[i][b]);
            bloch[i][b] = save + h;
            ProcessMatrix chi_hi = process_tomography(rho(0), rho(1), rho(2), rho(3));
            bloch[i][b] = save - h;
            ProcessMatrix chi_lo = process_tomography(rho(0), rho(1), rho(2), rho(3));
            bloch[i][b] = save;
            double grad =
                (ev_via_channel(chi_hi, target_b, observable_out) - ev_via_channel(chi_lo, target_b, observable_out)) /
                (2.0 * h);
            var += grad * grad * bloch_err[i][b] * bloch_err[i][b];
        }
    }
    out.combined.std_err = std::sqrt(var);
    for (const auto& ev : out.raw)
        out.combined.n_shots += ev.n_shots;
    out.combined.observable = std::string(1, observable_out);
    out.combined.d = patch.distance;
    out.combined.p = noise.p;
    return out;
}

struct SeriesResult {
    std::string label;  // input state (and angle for xy_plane)
    double p = 0.0;
    DataSeries series;
    FitResult fit;
    double richardson = 0.0;
    EffectiveDistance deff;
    bool has_deff = false;
    std::vector<std::pair<int, double>> ir_table;  // per distance, vs cutoff extrapolation
};

struct PipelineResult {
    std::vector<EVEstimate> ev_rows;       // every estimate, component and combined
    std::vector<EVEstimate> combined_rows; // one per (label, d, p)
    std::vector<SeriesResult> series;
};

inline void write_reports(const ExperimentConfig& config, const PipelineResult& result, const std::string& out_dir);

/// Runs the full experiment described by the configuration. Artifacts are
/// persisted under out_dir when given; decode summaries are always written
/// so later stages can resume without resampling.
inline PipelineResult run_pipeline(const ExperimentConfig& config, const std::string& out_dir = "") {
    namespace fs = std::filesystem;
    config.validate();
    const int workers = config.effective_workers();
    const uint64_t hash = config_hash(config);
    const bool store = !out_dir.empty();
    if (store) {
        fs::create_directories(fs::path(out_dir) / "decode");
        if (config.persist_shots)
            fs::create_directories(fs::path(out_dir) / "shots");
        std::ofstream cfg(fs::path(out_dir) / "config.json");
        nlohmann::json j = config_to_json(config);
        j["config_hash"] = hash;
        cfg << j.dump(2) << "\n";
    }

    struct Component {
        std::string label;        // series label (input state / angle)
        std::string state_label;  // component stabilizer state
        PrepState prep;
        double coeff;
        int index;  // position in the six-state basis, -1 for direct
    };

    // Series of input states: one for most configs, one per angle for the
    // xy_plane family.
    struct SeriesSpec {
        std::string label;
        Eigen::Vector4d target;
    };
    std::vector<SeriesSpec> specs;
    if (config.input_state == "xy_plane") {
        for (double theta : config.xy_thetas)
            specs.push_back(
                {"xy_plane(theta=" + detail::format_double(theta) + ")",
                 detail::pauli_targets_for_state("xy_plane", theta)});
    } else {
        specs.push_back({config.input_state, detail::pauli_targets_for_state(config.input_state)});
    }

    MeasureBasis out_basis = measure_basis_from_name(std::string(1, config.observable));
    PipelineResult result;

    for (const SeriesSpec& spec : specs) {
        std::optional<StabilizerDecomposition> decomposition;
        if (config.method == "decomposition")
            decomposition = decompose_state(spec.target);

        for (size_t pi = 0; pi < config.p_values.size(); pi++) {
            double p = config.p_values[pi];
            SeriesResult sr;
            sr.label = spec.label;
            sr.p = p;
            sr.series.parity = config.parity;
            sr.series.cutoff_d = config.cutoff_d;

            for (size_t di = 0; di < config.distances.size(); di++) {
                int d = config.distances[di];
                uint64_t shots = config.shots_for_distance_index(di);
                SurfaceCodePatch patch = build_patch(d);
                NoiseParams noise{p, config.inhomogeneity_sigma, config.noise_seed};

                EVEstimate combined;
                if (config.method == "tomography") {
                    std::map<MeasureBasis, PreparedDecoder> decoders;
                    std::map<MeasureBasis, const PreparedDecoder*> decoder_ptrs;
                    for (MeasureBasis b : {MeasureBasis::X, MeasureBasis::Y, MeasureBasis::Z}) {
                        decoders.emplace(b, PreparedDecoder(dem_for_measurement(patch, b, config.rounds_factor, noise)));
                        decoder_ptrs[b] = &decoders.at(b);
                    }
                    TomographyEV tomo = run_tomography_ev(
                        patch, spec.target, config.observable, config.rounds_factor, noise, shots,
                        detail::subseed(config.seed, pi, di, 7), workers, decoder_ptrs);
                    for (auto ev : tomo.raw) {
                        result.ev_rows.push_back(ev);
                    }
                    combined = tomo.combined;
                    combined.state_label = spec.label;
                } else {
                    std::vector<Component> components;
                    if (config.method == "direct") {
                        components.push_back(
                            {spec.label, spec.label, detail::prep_for_stabilizer_state(spec.label), 1.0, -1});
                    } else {
                        for (int i = 0; i < 6; i++)
                            components.push_back(
                                {spec.label, detail::stabilizer_state_name(kStabilizerBasis[i]), kStabilizerBasis[i],
                                 decomposition->x[i], i});
                    }

                    PreparedDecoder decoder(dem_for_measurement(patch, out_basis, config.rounds_factor, noise));
                    std::array<EVEstimate, 6> comp_evs;
                    EVEstimate direct_ev;
                    for (const Component& comp : components) {
                        uint64_t seed = detail::subseed(
                            config.seed, pi * 1000 + di, static_cast<uint64_t>(comp.index + 1),
                            std::hash<std::string>{}(spec.label));
                        EVEstimate ev;
                        std::string decode_key;
                        if (store) {
                            std::ostringstream key;
                            key << spec.label << "_d" << d << "_p" << detail::p_token(p) << "_" << comp.state_label;
                            decode_key = key.str();
                            for (char& c : decode_key)
                                if (c == '/' || c == ' ' || c == '(' || c == ')' || c == '=')
                                    c = '_';
                        }
                        fs::path summary_path =
                            store ? fs::path(out_dir) / "decode" / (decode_key + ".json") : fs::path();

                        bool reused = false;
                        if (store && fs::exists(summary_path)) {
                            std::ifstream in(summary_path);
                            nlohmann::json js = nlohmann::json::parse(in);
                            if (js.value("config_hash", uint64_t{0}) == hash &&
                                js.value("seed", uint64_t{0}) == seed) {
                                ev.value = js.at("value").get<double>();
                                ev.std_err = js.at("std_err").get<double>();
                                ev.n_shots = js.at("n_shots").get<uint64_t>();
                                reused = true;
                            }
                        }
                        if (!reused) {
                            if (store && config.persist_shots) {
                                MemoryCircuit circuit =
                                    build_memory_circuit(patch, comp.prep, out_basis, config.rounds_factor);
                                NoisyCircuit noisy = apply_si1000(circuit, noise);
                                ShotBatch batch = sample_shots(noisy, shots, seed, workers);
                                std::ofstream bits(
                                    fs::path(out_dir) / "shots" / (decode_key + ".sxb"), std::ios::binary);
                                write_shot_batch(bits, batch);
                                FrameSampler sampler(noisy);
                                LerEstimate ler = estimate_ler(decoder, batch, workers);
                                ev = ev_from_ler(ler, sampler.reference().noiseless_sign());
                            } else {
                                ev = run_memory_experiment(
                                    patch, comp.prep, out_basis, decoder, config.rounds_factor, noise, shots, seed,
                                    workers);
                            }
                        }
                        ev.state_label = comp.state_label;
                        ev.observable = std::string(1, config.observable);
                        ev.d = d;
                        ev.p = p;
                        if (store && !reused) {
                            nlohmann::json js;
                            js["config_hash"] = hash;
                            js["seed"] = seed;
                            js["n_shots"] = ev.n_shots;
                            js["value"] = ev.value;
                            js["std_err"] = ev.std_err;
                            js["state"] = comp.state_label;
                            js["d"] = d;
                            js["p"] = p;
                            std::ofstream outjs(summary_path);
                            outjs << js.dump(2) << "\n";
                        }
                        result.ev_rows.push_back(ev);
                        if (comp.index >= 0)
                            comp_evs[comp.index] = ev;
                        else
                            direct_ev = ev;
                    }
                    combined = config.method == "direct" ? direct_ev : combine_evs(*decomposition, comp_evs);
                    combined.state_label = spec.label;
                }
                combined.observable = std::string(1, config.observable);
                combined.d = d;
                combined.p = p;
                result.combined_rows.push_back(combined);
                sr.series.points.push_back({d, combined.value, combined.std_err, combined.n_shots});
            }

            // Fit, extrapolate, evaluate.
            Ansatz ansatz;
            if (config.ansatz == "single_exp")
                ansatz = Ansatz::single_exp;
            else if (config.ansatz == "double_exp")
                ansatz = Ansatz::double_exp;
            else
                ansatz = sr.series.fit_points().size() >= 5 ? Ansatz::double_exp : Ansatz::single_exp;
            sr.fit = lm_fit(sr.series, ansatz);
            sr.richardson = richardson_extrapolate(sr.series);
            sr.fit.bootstrap_samples =
                bootstrap(sr.series, ansatz, config.bootstrap_trials, detail::subseed(config.seed, pi, 4242, 0));
            if (config.true_ev) {
                double ide_error = std::abs(sr.fit.extrapolated - *config.true_ev);
                bool any_zero = false;
                for (const auto& pt : sr.series.fit_points())
                    any_zero = any_zero || std::abs(pt.ev - *config.true_ev) == 0.0;
                if (!any_zero && sr.series.fit_points().size() >= 2) {
                    sr.deff = effective_distance(sr.series, ide_error, *config.true_ev);
                    sr.has_deff = true;
                }
                for (const auto& pt : sr.series.points)
                    sr.ir_table.push_back(
                        {pt.d, improvement_ratio(pt.ev, sr.fit.extrapolated, *config.true_ev)});
            }
            result.series.push_back(std::move(sr));
        }
    }

    if (store)
        write_reports(config, result, out_dir);
    return result;
}

inline std::string ev_csv(const ExperimentConfig& config, const PipelineResult& result) {
    std::ostringstream out;
    out << "state_label,observable,d,p,value,std_err,n_shots,method\n";
    auto row = [&](const EVEstimate& ev, const std::string& method) {
        out << ev.state_label << "," << ev.observable << "," << ev.d << "," << detail::format_double(ev.p) << ","
            << detail::format_double(ev.value) << "," << detail::format_double(ev.std_err) << "," << ev.n_shots
            << "," << method << "\n";
    };
    if (config.method != "direct")
        for (const auto& ev : result.ev_rows)
            row(ev, "direct");
    for (const auto& ev : result.combined_rows)
        row(ev, config.method);
    return out.str();
}

inline nlohmann::json fit_report_json(const ExperimentConfig& config, const SeriesResult& sr) {
    nlohmann::json j;
    j["label"] = sr.label;
    j["p"] = sr.p;
    j["parity"] = parity_name(sr.series.parity);
    j["cutoff_d"] = sr.series.cutoff_d;
    j["ansatz"] = ansatz_name(sr.fit.ansatz);
    j["A"] = sr.fit.A;
    j["B"] = sr.fit.B;
    j["C"] = sr.fit.C;
    j["r2"] = sr.fit.r2;
    j["extrapolated"] = sr.fit.extrapolated;
    j["richardson"] = sr.richardson;
    j["converged"] = sr.fit.converged;
    j["degenerate"] = sr.fit.degenerate;
    std::vector<double> cov;
    for (int r = 0; r < sr.fit.covariance.rows(); r++)
        for (int c = 0; c < sr.fit.covariance.cols(); c++)
            cov.push_back(sr.fit.covariance(r, c));
    j["covariance"] = cov;
    if (!sr.fit.bootstrap_samples.empty()) {
        j["bootstrap"] = {
            {"trials", sr.fit.bootstrap_samples.size()},
            {"p2.5", percentile(sr.fit.bootstrap_samples, 2.5)},
            {"p16", percentile(sr.fit.bootstrap_samples, 16.0)},
            {"p50", percentile(sr.fit.bootstrap_samples, 50.0)},
            {"p84", percentile(sr.fit.bootstrap_samples, 84.0)},
            {"p97.5", percentile(sr.fit.bootstrap_samples, 97.5)},
        };
    }
    if (sr.has_deff && sr.deff.valid)
        j["d_eff"] = sr.deff.d_eff;
    if (!sr.ir_table.empty()) {
        nlohmann::json ir = nlohmann::json::array();
        for (auto [d, v] : sr.ir_table)
            ir.push_back({{"d", d}, {"ir", v}});
        j["improvement_ratio"] = ir;
    }
    nlohmann::json resources = nlohmann::json::array();
    for (double lambda : config.lambda_factors)
        for (double f : config.f_factors) {
            ResourceSavings rs = resource_savings(lambda, f, config.resource_baseline_d);
            resources.push_back(
                {{"lambda", lambda}, {"f", f}, {"delta_d", rs.delta_d}, {"qubit_ratio", rs.qubit_ratio}});
        }
    j["resource_savings"] = resources;
    return j;
}

inline std::string series_plot_csv(const SeriesResult& sr) {
    std::ostringstream out;
    out << "d,ev,std_err,fitted,residual\n";
    for (const auto& pt : sr.series.points) {
        double fitted = sr.fit.evaluate(pt.d);
        out << pt.d << "," << detail::format_double(pt.ev) << "," << detail::format_double(pt.std_err) << ","
            << detail::format_double(fitted) << "," << detail::format_double(pt.ev - fitted) << "\n";
    }
    return out.str();
}

inline std::string series_curve_csv(const SeriesResult& sr) {
    std::ostringstream out;
    out << "d,fitted\n";
    if (sr.series.points.empty())
        return out.str();
    double lo = sr.series.points.front().d, hi = sr.series.points.back().d + 4;
    for (double d = lo; d <= hi + 1e-9; d += 0.25)
        out << detail::format_double(d) << "," << detail::format_double(sr.fit.evaluate(d)) << "\n";
    return out.str();
}

inline std::string text_report(const ExperimentConfig& config, const PipelineResult& result) {
    std::ostringstream out;
    if (result.series.empty()) {
        out << "no results\n";
        return out.str();
    }
    out << "distance extrapolation report\n";
    out << "=============================\n";
    for (const auto& sr : result.series) {
        out << "\nseries: state " << sr.label << ", observable " << config.observable << ", p "
            << detail::format_double(sr.p) << ", parity " << parity_name(sr.series.parity) << ", cutoff d "
            << sr.series.cutoff_d << "\n";
        out << "  d        ev       std_err     fitted    residual\n";
        for (const auto& pt : sr.series.points) {
            double fitted = sr.fit.evaluate(pt.d);
            char line[160];
            std::snprintf(
                line, sizeof line, "  %-3d %9.6f  %9.2e  %9.6f  %10.3e\n", pt.d, pt.ev, pt.std_err, fitted,
                pt.ev - fitted);
            out << line;
        }
        char buf[256];
        std::snprintf(
            buf, sizeof buf, "  ansatz %s: extrapolated A = %.6f, R^2 = %.5f%s\n", ansatz_name(sr.fit.ansatz),
            sr.fit.extrapolated, sr.fit.r2, sr.fit.converged ? "" : "  [not converged]");
        out << buf;
        if (!sr.fit.bootstrap_samples.empty()) {
            std::snprintf(
                buf, sizeof buf, "  bootstrap 68%% interval: [%.6f, %.6f] (%zu trials)\n",
                percentile(sr.fit.bootstrap_samples, 16.0), percentile(sr.fit.bootstrap_samples, 84.0),
                sr.fit.bootstrap_samples.size());
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "  richardson extrapolation: %.6f\n", sr.richardson);
        out << buf;
        if (sr.has_deff && sr.deff.valid) {
            std::snprintf(buf, sizeof buf, "  effective distance: %.2f\n", sr.deff.d_eff);
            out << buf;
        }
        if (!sr.ir_table.empty()) {
            out << "  improvement ratio vs cutoff extrapolation:\n";
            for (auto [d, v] : sr.ir_table) {
                std::snprintf(buf, sizeof buf, "    IR(%d) = %.3f\n", d, v);
                out << buf;
            }
        }
    }
    out << "\nresource savings (baseline d = " << config.resource_baseline_d << ")\n";
    out << "  lambda   f       delta_d   qubit_ratio\n";
    for (double lambda : config.lambda_factors) {
        for (double f : config.f_factors) {
            ResourceSavings rs = resource_savings(lambda, f, config.resource_baseline_d);
            char buf[128];
            std::snprintf(buf, sizeof buf, "  %-7g %-7g +%-8.2f /%.2f\n", lambda, f, rs.delta_d, rs.qubit_ratio);
            out << buf;
        }
    }
    return out.str();
}

namespace detail {

struct ComponentJob {
    std::string label;
    std::string state_label;
    PrepState prep;
    int index;
    size_t p_index;
    size_t d_index;
    std::string key;  // artifact file stem
    uint64_t seed;
};

inline std::vector<ComponentJob> component_jobs(const ExperimentConfig& config) {
    std::vector<ComponentJob> jobs;
    std::vector<std::pair<std::string, Eigen::Vector4d>> specs;
    if (config.input_state == "xy_plane") {
        for (double theta : config.xy_thetas)
            specs.push_back(
                {"xy_plane(theta=" + format_double(theta) + ")", pauli_targets_for_state("xy_plane", theta)});
    } else {
        specs.push_back({config.input_state, pauli_targets_for_state(config.input_state)});
    }
    for (const auto& [label, target] : specs) {
        (void)target;
        for (size_t pi = 0; pi < config.p_values.size(); pi++) {
            for (size_t di = 0; di < config.distances.size(); di++) {
                auto add = [&](const std::string& state_label, PrepState prep, int index) {
                    std::ostringstream key;
                    key << label << "_d" << config.distances[di] << "_p" << p_token(config.p_values[pi]) << "_"
                        << state_label;
                    std::string k = key.str();
                    for (char& c : k)
                        if (c == '/' || c == ' ' || c == '(' || c == ')' || c == '=')
                            c = '_';
                    uint64_t seed = subseed(
                        config.seed, pi * 1000 + di, static_cast<uint64_t>(index + 1),
                        std::hash<std::string>{}(label));
                    jobs.push_back({label, state_label, prep, index, pi, di, k, seed});
                };
                if (config.method == "direct") {
                    add(label, prep_for_stabilizer_state(label), -1);
                } else if (config.method == "decomposition") {
                    for (int i = 0; i < 6; i++)
                        add(stabilizer_state_name(kStabilizerBasis[i]), kStabilizerBasis[i], i);
                }
            }
        }
    }
    return jobs;
}

}  // namespace detail

/// `build` stage: construct and validate every circuit, writing the debug
/// text serialization.
inline void stage_build(const ExperimentConfig& config, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "circuits");
    MeasureBasis basis = measure_basis_from_name(std::string(1, config.observable));
    for (int d : config.distances) {
        SurfaceCodePatch patch = build_patch(d);
        std::vector<PrepState> preps;
        if (config.method == "tomography")
            preps = {PrepState::Zp, PrepState::Zm, PrepState::Xp, PrepState::Yp};
        else if (config.method == "decomposition")
            preps.assign(kStabilizerBasis.begin(), kStabilizerBasis.end());
        else
            preps = {detail::prep_for_stabilizer_state(config.input_state)};
        std::vector<MeasureBasis> bases = config.method == "tomography"
                                              ? std::vector<MeasureBasis>{MeasureBasis::X, MeasureBasis::Y, MeasureBasis::Z}
                                              : std::vector<MeasureBasis>{basis};
        for (MeasureBasis b : bases) {
            for (PrepState prep : preps) {
                MemoryCircuit circuit = build_memory_circuit(patch, prep, b, config.rounds_factor);
                if (!validate_determinism(circuit, 16, 1))
                    throw std::runtime_error(
                        std::string("build: nondeterministic detectors for prep ") + prep_state_name(prep));
                std::ostringstream name;
                name << "d" << d << "_" << prep_state_name(prep) << "_" << measure_basis_name(b) << ".txt";
                std::string file = name.str();
                for (char& c : file)
                    if (c == '+')
                        c = 'p';
                    else if (c == '-')
                        c = 'm';
                std::ofstream out(fs::path(out_dir) / "circuits" / file);
                out << circuit_to_text(circuit);
            }
        }
    }
}

/// `sample` stage: write packed shot files for every component experiment.
inline void stage_sample(const ExperimentConfig& config, const std::string& out_dir) {
    namespace fs = std::filesystem;
    if (config.method == "tomography")
        throw std::runtime_error("sample: staged shot files are not defined for tomography; use run");
    fs::create_directories(fs::path(out_dir) / "shots");
    MeasureBasis basis = measure_basis_from_name(std::string(1, config.observable));
    for (const auto& job : detail::component_jobs(config)) {
        fs::path path = fs::path(out_dir) / "shots" / (job.key + ".sxb");
        if (fs::exists(path))
            continue;
        SurfaceCodePatch patch = build_patch(config.distances[job.d_index]);
        NoiseParams noise{config.p_values[job.p_index], config.inhomogeneity_sigma, config.noise_seed};
        MemoryCircuit circuit = build_memory_circuit(patch, job.prep, basis, config.rounds_factor);
        NoisyCircuit noisy = apply_si1000(circuit, noise);
        ShotBatch batch =
            sample_shots(noisy, config.shots_for_distance_index(job.d_index), job.seed, config.effective_workers());
        std::ofstream out(path, std::ios::binary);
        write_shot_batch(out, batch);
    }
}

/// `dem` stage: write the detector error model and matching graph for each
/// (d, p) at the measurement basis.
inline void stage_dem(const ExperimentConfig& config, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "dems");
    std::vector<MeasureBasis> bases;
    if (config.method == "tomography")
        bases = {MeasureBasis::X, MeasureBasis::Y, MeasureBasis::Z};
    else
        bases = {measure_basis_from_name(std::string(1, config.observable))};
    for (MeasureBasis basis : bases) {
        for (int d : config.distances) {
            SurfaceCodePatch patch = build_patch(d);
            for (double p : config.p_values) {
                NoiseParams noise{p, config.inhomogeneity_sigma, config.noise_seed};
                MemoryCircuit companion =
                    build_memory_circuit(patch, plus_eigenstate(basis), basis, config.rounds_factor);
                NoisyCircuit noisy = apply_si1000(companion, noise);
                auto mechanisms = extract_dem(noisy);
                MatchingGraph graph = build_matching_graph(mechanisms, companion.num_detectors());
                std::ostringstream stem;
                stem << measure_basis_name(basis) << "_d" << d << "_p" << detail::p_token(p);
                std::ofstream dem(fs::path(out_dir) / "dems" / (stem.str() + ".dem.txt"));
                dem << dem_to_text(mechanisms);
                std::ofstream g(fs::path(out_dir) / "dems" / (stem.str() + ".graph.txt"));
                g << matching_graph_to_text(graph);
            }
        }
    }
}

/// `decode` stage: consume persisted shot files, write per-shot prediction
/// bits and decode summaries.
inline void stage_decode(const ExperimentConfig& config, const std::string& out_dir) {
    namespace fs = std::filesystem;
    if (config.method == "tomography")
        throw std::runtime_error("decode: staged shot files are not defined for tomography; use run");
    fs::create_directories(fs::path(out_dir) / "decode");
    const uint64_t hash = config_hash(config);
    MeasureBasis basis = measure_basis_from_name(std::string(1, config.observable));
    std::map<std::pair<int, size_t>, std::unique_ptr<PreparedDecoder>> decoders;
    for (const auto& job : detail::component_jobs(config)) {
        int d = config.distances[job.d_index];
        double p = config.p_values[job.p_index];
        fs::path shot_path = fs::path(out_dir) / "shots" / (job.key + ".sxb");
        if (!fs::exists(shot_path))
            throw std::runtime_error(
                "decode: missing shot file for (d=" + std::to_string(d) + ", p=" + detail::format_double(p) +
                ", component=" + job.state_label + "); run the sample stage first");
        std::ifstream in(shot_path, std::ios::binary);
        ShotBatch batch = read_shot_batch(in);

        auto key = std::make_pair(d, job.p_index);
        if (!decoders.count(key)) {
            // Prefer the dem stage's persisted edge list; fall back to
            // rebuilding the graph from the configuration.
            std::ostringstream stem;
            stem << measure_basis_name(basis) << "_d" << d << "_p" << detail::p_token(p);
            fs::path graph_path = fs::path(out_dir) / "dems" / (stem.str() + ".graph.txt");
            MatchingGraph graph;
            if (fs::exists(graph_path)) {
                std::ifstream gin(graph_path);
                std::string text((std::istreambuf_iterator<char>(gin)), std::istreambuf_iterator<char>());
                graph = matching_graph_from_text(text);
            } else {
                SurfaceCodePatch patch = build_patch(d);
                NoiseParams noise{p, config.inhomogeneity_sigma, config.noise_seed};
                graph = dem_for_measurement(patch, basis, config.rounds_factor, noise);
            }
            decoders.emplace(key, std::make_unique<PreparedDecoder>(graph));
        }
        BatchDecodeResult decoded = decode_batch(*decoders.at(key), batch, config.effective_workers());

        SurfaceCodePatch patch = build_patch(d);
        MemoryCircuit circuit = build_memory_circuit(patch, job.prep, basis, config.rounds_factor);
        CircuitReference ref = prepare_reference(circuit);
        EVEstimate ev = ev_from_ler(decoded.ler, ref.noiseless_sign());

        std::ofstream pred(fs::path(out_dir) / "decode" / (job.key + ".pred.bits"), std::ios::binary);
        pred.write(
            reinterpret_cast<const char*>(decoded.predictions.words().data()),
            static_cast<std::streamsize>(decoded.predictions.words().size() * 8));
        nlohmann::json js;
        js["config_hash"] = hash;
        js["seed"] = job.seed;
        js["n_shots"] = decoded.ler.n_shots;
        js["n_fails"] = decoded.ler.n_fails;
        js["p_l"] = decoded.ler.p_l;
        js["p_l_std_err"] = decoded.ler.std_err;
        js["value"] = ev.value;
        js["std_err"] = ev.std_err;
        js["state"] = job.state_label;
        js["d"] = d;
        js["p"] = p;
        std::ofstream summary(fs::path(out_dir) / "decode" / (job.key + ".json"));
        summary << js.dump(2) << "\n";
    }
}

inline void write_reports(const ExperimentConfig& config, const PipelineResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "fit");
    fs::create_directories(fs::path(out_dir) / "plots");
    {
        std::ofstream csv(fs::path(out_dir) / "ev.csv");
        csv << ev_csv(config, result);
    }
    for (const auto& sr : result.series) {
        std::string key = sr.label + "_p" + detail::p_token(sr.p);
        for (char& c : key)
            if (c == '/' || c == ' ' || c == '(' || c == ')' || c == '=')
                c = '_';
        std::ofstream fit(fs::path(out_dir) / "fit" / (key + ".json"));
        fit << fit_report_json(config, sr).dump(2) << "\n";
        std::ofstream plot(fs::path(out_dir) / "plots" / (key + ".csv"));
        plot << series_plot_csv(sr);
        std::ofstream curve(fs::path(out_dir) / "plots" / (key + "_curve.csv"));
        curve << series_curve_csv(sr);
    }
    std::ofstream report(fs::path(out_dir) / "report.txt");
    report << text_report(config, result);
}

}  // namespace dextra

#endif
