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
#include "fbmc/version.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <locale>
#include <mutex>
#include <sstream>
#include <thread>

namespace fbmc {

namespace {

double mean_db(const std::vector<TrialResult> &trials, double TrialResult::*field)
{
    double acc = 0.0;
    for (const auto &t : trials)
        acc += db_to_linear(t.*field);
    return linear_to_db(acc / static_cast<double>(trials.size()));
}

double mean_of(const std::vector<TrialResult> &trials, double TrialResult::*field)
{
    double acc = 0.0;
    for (const auto &t : trials)
        acc += t.*field;
    return acc / static_cast<double>(trials.size());
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path &path) : out_(path)
    {
        if (!out_)
            throw ConfigError("cannot write '" + path.string() + "'");
        out_.imbue(std::locale::classic());
        out_.precision(10);
    }
    template <typename... T> void row(const T &...cells)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cells, first = false), ...);
        out_ << '\n';
    }
    std::ofstream &stream() { return out_; }

  private:
    std::ofstream out_;
};

const char *kSummaryHeader = "sinr_db_fbmc_fsp,sinr_db_fbmc_1tap,sinr_db_ofdm,sinr_db_mc,sir_db_fbmc_fsp,sir_iqr_db,"
                             "mean_service_antennas,mean_service_aps,max_antenna_power_w,trials";

void write_summary_cells(std::ostream &os, const RunSummary &s)
{
    os << s.sinr_fsp_db << ',' << s.sinr_1tap_db << ',' << s.sinr_ofdm_db << ',' << s.sinr_mc_db << ','
       << s.sir_fsp_db << ',' << s.sir_iqr_db << ',' << s.mean_service_antennas << ',' << s.mean_service_aps << ','
       << s.max_antenna_power_w << ',' << s.trials.size();
}

void write_manifest(const std::filesystem::path &path, const nlohmann::json &j)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

} // namespace

nlohmann::json manifest_json(const ScenarioConfig &cfg)
{
    nlohmann::json j;
    j["version"] = kVersion;
    j["seed"] = cfg.seed;
    j["config"] = config_to_json(cfg);
    return j;
}

RunSummary simulate(const ScenarioConfig &cfg)
{
    validate(cfg);
    const PrototypeFilter proto = design_prototype(cfg.subcarriers, cfg.overlap);

    RunSummary s;
    s.config = cfg;
    s.trials.resize(cfg.trials);

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mtx;
    auto worker = [&] {
        for (int t = next++; t < cfg.trials; t = next++)
        {
            try
            {
                s.trials[t] = run_trial(cfg, proto, trial_seed(cfg.seed, static_cast<std::uint64_t>(t)));
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mtx);
                if (!failure)
                    failure = std::current_exception();
                next = cfg.trials;
            }
        }
    };
    const int workers = std::min(cfg.threads, cfg.trials);
    if (workers <= 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    // reductions run in trial order so the result does not depend on threads
    s.sinr_fsp_db = mean_db(s.trials, &TrialResult::sinr_fsp_db);
    s.sinr_1tap_db = cfg.single_tap ? mean_db(s.trials, &TrialResult::sinr_1tap_db) : 0.0;
    s.sinr_ofdm_db = cfg.ofdm ? mean_db(s.trials, &TrialResult::sinr_ofdm_db) : 0.0;
    s.sinr_mc_db = cfg.mc_slots > 0 ? mean_db(s.trials, &TrialResult::sinr_mc_db) : 0.0;
    s.sir_fsp_db = mean_db(s.trials, &TrialResult::sir_fsp_db);
    s.mean_service_antennas = mean_of(s.trials, &TrialResult::mean_service_antennas);
    s.mean_service_aps = mean_of(s.trials, &TrialResult::mean_service_aps);
    for (const auto &t : s.trials)
        s.max_antenna_power_w = std::max(s.max_antenna_power_w, t.max_antenna_power_w);
    RVec sir;
    for (const auto &t : s.trials)
        sir.insert(sir.end(), t.user_sir_db.begin(), t.user_sir_db.end());
    s.sir_iqr_db = sir_cdf(sir).interquartile_range();
    return s;
}

RunSummary run_scenario(const ScenarioConfig &cfg, const std::filesystem::path &out_dir)
{
    validate(cfg);
    std::filesystem::create_directories(out_dir);
    RunSummary s = simulate(cfg);

    {
        CsvWriter w(out_dir / "trials.csv");
        w.row("trial", "seed", "sinr_db_fbmc_fsp", "sinr_db_fbmc_1tap", "sinr_db_ofdm", "sinr_db_mc", "sir_db_fbmc_fsp",
              "mean_service_antennas", "mean_service_aps", "max_antenna_power_w");
        for (std::size_t t = 0; t < s.trials.size(); ++t)
        {
            const TrialResult &r = s.trials[t];
            w.row(t, trial_seed(cfg.seed, t), r.sinr_fsp_db, r.sinr_1tap_db, r.sinr_ofdm_db, r.sinr_mc_db, r.sir_fsp_db,
                  r.mean_service_antennas, r.mean_service_aps, r.max_antenna_power_w);
        }
    }
    {
        CsvWriter w(out_dir / "users.csv");
        w.row("trial", "user", "sir_db", "sinr_db");
        for (std::size_t t = 0; t < s.trials.size(); ++t)
            for (std::size_t k = 0; k < s.trials[t].user_sir_db.size(); ++k)
                w.row(t, k, s.trials[t].user_sir_db[k], s.trials[t].user_sinr_db[k]);
    }
    {
        CsvWriter w(out_dir / "summary.csv");
        w.stream() << kSummaryHeader << '\n';
        write_summary_cells(w.stream(), s);
        w.stream() << '\n';
    }
    write_manifest(out_dir / "manifest.json", manifest_json(cfg));
    return s;
}

std::vector<RunSummary> sweep(const ScenarioConfig &cfg, const std::string &axis, const std::vector<double> &values,
                              const std::filesystem::path &out_dir)
{
    if (values.empty())
        throw ConfigError("sweep: no values given");
    std::vector<ScenarioConfig> configs;
    for (double v : values)
    {
        configs.push_back(with_value(cfg, axis, v));
        validate(configs.back());
    }
    std::filesystem::create_directories(out_dir);

    std::vector<RunSummary> out;
    CsvWriter w(out_dir / "sweep.csv");
    w.stream() << axis << ',' << kSummaryHeader << '\n';
    for (std::size_t i = 0; i < configs.size(); ++i)
    {
        out.push_back(simulate(configs[i]));
        w.stream() << values[i] << ',';
        write_summary_cells(w.stream(), out.back());
        w.stream() << '\n';
    }

    nlohmann::json m = manifest_json(cfg);
    m["sweep"] = {{"axis", axis}, {"values", values}};
    write_manifest(out_dir / "manifest.json", m);
    return out;
}

} // namespace fbmc
