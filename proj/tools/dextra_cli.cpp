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

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "dextra/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitStageError = 3;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "dextra_run";
    int workers = -1;
    std::optional<uint64_t> seed;
};

dextra::ExperimentConfig load_config(const CommonOptions& opts) {
    std::ifstream in(opts.config_path);
    if (!in)
        throw std::invalid_argument("cannot open config file '" + opts.config_path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    dextra::ExperimentConfig config = dextra::config_from_json(j);
    if (opts.workers >= 0)
        config.workers = opts.workers;
    if (opts.seed)
        config.seed = *opts.seed;
    config.validate();
    return config;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment configuration JSON")->required();
    cmd->add_option("--out", opts.out_dir, "run directory for artifacts");
    cmd->add_option("--workers", opts.workers, "worker thread count (overrides config)");
    cmd->add_option("--seed", opts.seed, "seed override");
}

int run_stage(const std::string& stage, const CommonOptions& opts) {
    dextra::ExperimentConfig config;
    try {
        config = load_config(opts);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        if (stage == "build") {
            dextra::stage_build(config, opts.out_dir);
        } else if (stage == "sample") {
            dextra::stage_sample(config, opts.out_dir);
        } else if (stage == "dem") {
            dextra::stage_dem(config, opts.out_dir);
        } else if (stage == "decode") {
            dextra::stage_decode(config, opts.out_dir);
        } else if (stage == "estimate" || stage == "fit" || stage == "report" || stage == "run") {
            // These stages share the pipeline driver; persisted decode
            // summaries short-circuit any already-computed sampling.
            dextra::PipelineResult result = dextra::run_pipeline(config, opts.out_dir);
            if (stage == "report" || stage == "run")
                std::cout << dextra::text_report(config, result);
        } else {
            std::cerr << "unknown stage '" << stage << "'\n";
            return kExitConfigError;
        }
    } catch (const std::exception& e) {
        std::cerr << "stage " << stage << " failed: " << e.what() << "\n";
        return kExitStageError;
    }
    std::cerr << "stage " << stage << " complete; artifacts in " << opts.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotated-surface-code memory experiments with distance extrapolation"};
    app.require_subcommand(1);

    std::map<std::string, CommonOptions> opts;
    std::string run_stage_name = "run";
    for (const char* name : {"build", "sample", "dem", "decode", "estimate", "fit", "report", "run"}) {
        CLI::App* cmd = app.add_subcommand(name, std::string("run the ") + name + " stage");
        add_common(cmd, opts[name]);
        if (std::string(name) == "run")
            cmd->add_option("--stage", run_stage_name, "restrict the run to one stage");
    }

    CLI11_PARSE(app, argc, argv);
    for (const auto* cmd : app.get_subcommands()) {
        std::string stage = cmd->get_name();
        if (stage == "run" && run_stage_name != "run")
            stage = run_stage_name;
        return run_stage(stage, opts[cmd->get_name()]);
    }
    return kExitConfigError;
}
