// SPDX-License-Identifier: Apache-2.0
//
// fbmc-mimo: downlink FBMC-OQAM massive MIMO link simulator
// Copyright (C) 2026 The fbmc-mimo authors
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

// Command-line experiment runner.
//
//   fbmc_mimo run      --config cfg.json --out results/ [--seed S] [--trials T] [--threads P]
//   fbmc_mimo sweep    --config cfg.json --out results/ --axis antennas --values 32,64,128
//   fbmc_mimo validate --config cfg.json
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include "fbmc/scenario.hpp"
#include "fbmc/version.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config;
    std::string out = "results";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
};

void add_common(CLI::App *cmd, Overrides &o, bool with_out)
{
    cmd->add_option("--config", o.config, "JSON scenario file")->required()->check(CLI::ExistingFile);
    if (with_out)
        cmd->add_option("--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "master seed (overrides the file)");
    cmd->add_option("--trials", o.trials, "number of trials (overrides the file)");
    cmd->add_option("--threads", o.threads, "worker threads (overrides the file)");
}

fbmc::ScenarioConfig load(const Overrides &o)
{
    fbmc::ScenarioConfig cfg = fbmc::load_config(o.config);
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.trials)
        cfg.trials = *o.trials;
    if (o.threads)
        cfg.threads = *o.threads;
    fbmc::validate(cfg);
    return cfg;
}

void print_summary(const fbmc::RunSummary &s)
{
    std::cout << "trials " << s.trials.size() << "  sinr_fbmc_fsp " << s.sinr_fsp_db << " dB";
    if (s.config.single_tap)
        std::cout << "  sinr_fbmc_1tap " << s.sinr_1tap_db << " dB";
    if (s.config.ofdm)
        std::cout << "  sinr_ofdm " << s.sinr_ofdm_db << " dB";
    if (s.config.mc_slots > 0)
        std::cout << "  sinr_mc " << s.sinr_mc_db << " dB";
    std::cout << '\n';
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Downlink FBMC-OQAM massive MIMO link simulator"};
    app.set_version_flag("--version", std::string(fbmc::kVersion));
    app.require_subcommand(1);

    Overrides run_opts, sweep_opts, validate_opts;
    std::string axis;
    std::vector<double> values;

    auto *run = app.add_subcommand("run", "run one scenario");
    add_common(run, run_opts, true);
    auto *sw = app.add_subcommand("sweep", "run a scenario for each value of one numeric key");
    add_common(sw, sweep_opts, true);
    sw->add_option("--axis", axis, "configuration key to vary")->required();
    sw->add_option("--values", values, "comma separated values")->required()->delimiter(',');
    auto *val = app.add_subcommand("validate", "check a configuration file and print it with defaults filled in");
    add_common(val, validate_opts, false);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try
    {
        if (*run)
        {
            const fbmc::ScenarioConfig cfg = load(run_opts);
            print_summary(fbmc::run_scenario(cfg, run_opts.out));
            std::cout << "results written to " << run_opts.out << '\n';
        }
        else if (*sw)
        {
            const fbmc::ScenarioConfig cfg = load(sweep_opts);
            const auto runs = fbmc::sweep(cfg, axis, values, sweep_opts.out);
            for (std::size_t i = 0; i < runs.size(); ++i)
            {
                std::cout << axis << " = " << values[i] << ": ";
                print_summary(runs[i]);
            }
            std::cout << "results written to " << sweep_opts.out << '\n';
        }
        else if (*val)
        {
            const fbmc::ScenarioConfig cfg = load(validate_opts);
            std::cout << fbmc::config_to_json(cfg).dump(2) << '\n';
        }
    }
    catch (const fbmc::ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const fbmc::NumericalError &e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
