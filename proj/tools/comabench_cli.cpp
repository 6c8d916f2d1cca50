// SPDX-License-Identifier: Apache-2.0
//
// comabench - multiuser MISO precoding workbench for constructive multiple access
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Experiment runner CLI. One subcommand per sweep; a flat key=value config
// file provides the scenario and command-line flags override it. Exit codes:
// 0 success, 1 validation error, 2 I/O error, 3 optimizer-failure-rate
// breach (more than 10% resampled draws at some sweep point).

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "comabench/experiment.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::string schemes;
    long draws = -1;
    long symbols = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int run_experiment(comabench::ExperimentKind kind, const CliArgs& args) {
    comabench::ExperimentConfig cfg;
    try {
        if (!args.config_path.empty()) {
            std::ifstream f(args.config_path);
            if (!f) {
                std::cerr << "error: cannot open config " << args.config_path << "\n";
                return 2;
            }
            cfg = comabench::parse_config(f);
        }
        cfg.experiment = kind;
        if (args.seed_set) cfg.seed = args.seed;
        if (args.draws > 0) cfg.n_draws = args.draws;
        if (args.symbols > 0) cfg.n_symbols = args.symbols;
        if (!args.schemes.empty()) comabench::apply_config_key(cfg, "schemes", args.schemes);
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    comabench::EmitFormat fmt;
    if (args.format == "csv")
        fmt = comabench::EmitFormat::Csv;
    else if (args.format == "jsonl")
        fmt = comabench::EmitFormat::JsonLines;
    else {
        std::cerr << "error: format must be csv or jsonl\n";
        return 1;
    }

    std::vector<comabench::ResultRow> rows;
    try {
        rows = comabench::run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (args.out_path.empty())
            comabench::emit(rows, fmt, std::cout);
        else
            comabench::emit_to_file(rows, fmt, args.out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    for (const auto& r : rows)
        if (r.metric == "resample_rate" && r.value > 0.10) {
            std::cerr << "warning: optimizer failure rate " << r.value << " at " << r.scheme
                      << " x=" << r.x << "\n";
            return 3;
        }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"comabench - multiuser MISO precoding experiments"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "flat key=value config file");
        sub->add_option("--out", args.out_path, "output path (default: stdout)");
        sub->add_option("--format", args.format, "csv|jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
        sub->add_option("--draws", args.draws, "channel draws per sweep point");
        sub->add_option("--symbols", args.symbols, "symbols per user per sweep point");
        sub->add_option("--seed", args.seed, "64-bit master seed")
            ->each([&](const std::string&) { args.seed_set = true; });
        sub->add_option("--schemes", args.schemes, "comma list from oma,noma,coma");
    };

    using comabench::ExperimentKind;
    std::map<std::string, ExperimentKind> kinds{
        {"power-vs-antennas", ExperimentKind::PowerVsAntennas},
        {"power-vs-targets", ExperimentKind::PowerVsTargets},
        {"ser-vs-power", ExperimentKind::SerVsPower},
        {"complexity-vs-antennas", ExperimentKind::ComplexityVsAntennas},
        {"complexity-vs-mod-order", ExperimentKind::ComplexityVsModOrder}};
    std::map<std::string, CLI::App*> subs;
    subs["power-vs-antennas"] =
        app.add_subcommand("power-vs-antennas", "mean transmit power vs antenna count");
    subs["power-vs-targets"] =
        app.add_subcommand("power-vs-targets", "mean transmit power vs target SINR");
    subs["ser-vs-power"] = app.add_subcommand("ser-vs-power", "symbol error rate vs power budget");
    subs["complexity-vs-antennas"] =
        app.add_subcommand("complexity-vs-antennas", "receiver complexity vs antenna count");
    subs["complexity-vs-mod-order"] =
        app.add_subcommand("complexity-vs-mod-order", "receiver complexity vs modulation order");
    for (auto& [name, sub] : subs) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // flag/usage problems are validation errors
    }

    for (auto& [name, sub] : subs)
        if (sub->parsed()) return run_experiment(kinds[name], args);
    return 1;
}
