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

#include "fbmc/scenario.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace fbmc;

namespace {

ScenarioConfig small_colocated()
{
    ScenarioConfig c;
    c.subcarriers = 16;
    c.users = 3;
    c.antennas = 12;
    c.snr_db = 10.0;
    c.trials = 3;
    c.seed = 42;
    return c;
}

ScenarioConfig small_cellfree()
{
    ScenarioConfig c;
    c.mode = DeploymentMode::cellfree;
    c.subcarriers = 16;
    c.users = 3;
    c.aps = 9;
    c.antennas_per_ap = 2;
    c.trials = 2;
    c.seed = 7;
    c.power_allocation = PowerScheme::fractional;
    c.ap_threshold_db = -10.0;
    return c;
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string &name)
{
    auto p = std::filesystem::temp_directory_path() / ("fbmc_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config json round trip")
{
    for (ScenarioConfig c : {ScenarioConfig{}, small_colocated(), small_cellfree()})
    {
        c.impairment = Impairment::both;
        c.compensation = c.mode == DeploymentMode::cellfree ? Compensation::correction_term : Compensation::statistical;
        c.fsp_mode = FspMode::mmse;
        c.correction_form = CorrectionForm::unit_beta;
        const nlohmann::json j = config_to_json(c);
        CHECK(config_from_json(j) == c);
        // and through text
        CHECK(config_from_json(nlohmann::json::parse(j.dump())) == c);
    }
    // an absent threshold survives as -inf
    const ScenarioConfig d;
    CHECK(config_from_json(config_to_json(d)).ap_threshold_db == -std::numeric_limits<double>::infinity());
    // large seeds are kept exactly
    ScenarioConfig s;
    s.seed = 0xfedcba9876543210ULL;
    CHECK(config_from_json(nlohmann::json::parse(config_to_json(s).dump())).seed == s.seed);
}

TEST_CASE("config parsing rejects bad input")
{
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"antenas", 64}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"antennas", "64"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"antennas", 6.5}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"mode", "distributed"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"ofdm", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"seed", -1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ConfigError);
    CHECK(config_from_json(nlohmann::json::object()) == ScenarioConfig{});
    CHECK(config_from_json(nlohmann::json{{"antennas", 128}}).antennas == 128);

    const auto dir = scratch("badjson");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.json") << "{ \"antennas\": ";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("config validation")
{
    auto bad = [](auto mutate) {
        ScenarioConfig c = small_colocated();
        mutate(c);
        return c;
    };
    CHECK_NOTHROW(validate(small_colocated()));
    CHECK_NOTHROW(validate(small_cellfree()));
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.subcarriers = 15; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.overlap = 5; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.antennas = 2; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.fsp_length = 0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.trials = 0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.threads = 0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.xi_min = 1.1; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.calibration_energy = 0.0; })), ConfigError);
    CHECK_THROWS_AS(validate(bad([](auto &c) { c.compensation = Compensation::correction_term; })), ConfigError);

    ScenarioConfig cf = small_cellfree();
    cf.aps = 10;
    CHECK_THROWS_AS(validate(cf), ConfigError);
    cf = small_cellfree();
    cf.compensation = Compensation::downlink_pilot;
    CHECK_THROWS_AS(validate(cf), ConfigError);
    cf.compensation = Compensation::statistical;
    CHECK_THROWS_AS(validate(cf), ConfigError);
}

TEST_CASE("sweep keys and with_value")
{
    const auto &keys = sweepable_keys();
    const std::set<std::string> ks(keys.begin(), keys.end());
    for (const char *k : {"antennas", "snr_db", "aps", "ap_threshold_db", "fsp_length"})
        CHECK(ks.count(k) == 1);
    CHECK(ks.count("mode") == 0);

    const ScenarioConfig c = small_colocated();
    CHECK(with_value(c, "antennas", 32).antennas == 32);
    CHECK(with_value(c, "snr_db", -3.5).snr_db == -3.5);
    CHECK_THROWS_AS(with_value(c, "antennas", 32.5), ConfigError);
    CHECK_THROWS_AS(with_value(c, "mode", 1.0), ConfigError);
    CHECK_THROWS_AS(with_value(c, "nonsense", 1.0), ConfigError);
}

TEST_CASE("trial seeds are a deterministic spread of (seed, trial)")
{
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 20; ++s)
        for (std::uint64_t t = 0; t < 50; ++t)
            seen.insert(trial_seed(s, t));
    CHECK(seen.size() == 1000);
    CHECK(trial_seed(1, 2) != trial_seed(2, 1));
}

TEST_CASE("simulation is reproducible and independent of threads and trial count")
{
    ScenarioConfig c = small_colocated();
    c.mc_slots = 40;
    const RunSummary a = simulate(c);
    const RunSummary b = simulate(c);
    CHECK(a.sinr_fsp_db == b.sinr_fsp_db);
    CHECK(a.sinr_mc_db == b.sinr_mc_db);

    c.threads = 3;
    const RunSummary p = simulate(c);
    CHECK(p.sinr_fsp_db == a.sinr_fsp_db);
    CHECK(p.sinr_ofdm_db == a.sinr_ofdm_db);
    CHECK(p.sir_iqr_db == a.sir_iqr_db);

    // trial t does not depend on how many trials run
    c.trials = 5;
    c.threads = 1;
    const RunSummary longer = simulate(c);
    for (int t = 0; t < 3; ++t)
        CHECK(longer.trials[t].sinr_fsp_db == a.trials[t].sinr_fsp_db);

    c.seed = 43;
    CHECK(simulate(c).trials[0].sinr_fsp_db != a.trials[0].sinr_fsp_db);
}

TEST_CASE("summary aggregates are linear means of the trials")
{
    const RunSummary s = simulate(small_colocated());
    double acc = 0.0;
    for (const auto &t : s.trials)
        acc += std::pow(10.0, t.sinr_fsp_db / 10.0);
    CHECK(s.sinr_fsp_db == doctest::Approx(10.0 * std::log10(acc / s.trials.size())).epsilon(1e-12));
    for (const auto &t : s.trials)
    {
        CHECK(t.user_sir_db.size() == 3);
        CHECK(t.sinr_fsp_db <= t.sir_fsp_db + 1e-9);
        CHECK(std::isfinite(t.sinr_1tap_db));
    }
}

TEST_CASE("cell-free trials respect the power budget")
{
    const ScenarioConfig c = small_cellfree();
    const RunSummary s = simulate(c);
    CHECK(s.max_antenna_power_w <= c.p_max_w * (1.0 + 1e-9));
    CHECK(s.max_antenna_power_w > 0.0);
    CHECK(s.mean_service_antennas >= c.antennas_per_ap);
    CHECK(s.mean_service_antennas <= c.aps * c.antennas_per_ap);
    CHECK(s.mean_service_aps * c.antennas_per_ap == doctest::Approx(s.mean_service_antennas));
}

TEST_CASE("run_scenario output files and manifest round trip")
{
    const auto dir = scratch("run");
    const ScenarioConfig c = small_colocated();
    const RunSummary s = run_scenario(c, dir);
    for (const char *f : {"trials.csv", "users.csv", "summary.csv", "manifest.json"})
        CHECK(std::filesystem::exists(dir / f));

    const nlohmann::json m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(config_from_json(m.at("config")) == c);
    CHECK(m.at("seed").get<std::uint64_t>() == c.seed);

    // header + one line per trial
    std::istringstream trials(slurp(dir / "trials.csv"));
    int lines = 0;
    for (std::string line; std::getline(trials, line);)
        ++lines;
    CHECK(lines == 1 + c.trials);

    // a second run writes identical bytes
    const auto dir2 = scratch("run2");
    run_scenario(c, dir2);
    CHECK(slurp(dir / "summary.csv") == slurp(dir2 / "summary.csv"));
    CHECK(slurp(dir / "trials.csv") == slurp(dir2 / "trials.csv"));
    CHECK(s.trials.size() == static_cast<std::size_t>(c.trials));
}

TEST_CASE("sweep over one value matches a single run")
{
    const auto dir = scratch("sweep");
    ScenarioConfig c = small_colocated();
    const auto runs = sweep(c, "antennas", {8.0, 12.0}, dir);
    REQUIRE(runs.size() == 2);
    CHECK(runs[1].sinr_fsp_db == simulate(c).sinr_fsp_db);
    c.antennas = 8;
    CHECK(runs[0].sinr_fsp_db == simulate(c).sinr_fsp_db);
    CHECK(std::filesystem::exists(dir / "sweep.csv"));
    const nlohmann::json m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m.at("sweep").at("axis") == "antennas");
    CHECK_THROWS_AS(sweep(c, "antennas", {}, dir), ConfigError);
    CHECK_THROWS_AS(sweep(c, "antennas", {2.0}, dir), ConfigError);
}
