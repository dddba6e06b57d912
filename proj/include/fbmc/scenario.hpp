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

// Scenario configuration, the per-trial downlink pipeline and the
// Monte-Carlo runner that writes CSV results and a run manifest.

#pragma once

#include "fbmc/core_dsp.hpp"
#include "fbmc/fsp.hpp"
#include "fbmc/impairments.hpp"
#include "fbmc/metrics.hpp"
#include "fbmc/precoding.hpp"
#include "fbmc/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace fbmc {

enum class Impairment { perfect, est_error, reciprocity, both };
enum class Compensation { none, statistical, downlink_pilot, correction_term };
enum class PowerScheme { max, fractional };

struct ScenarioConfig {
    DeploymentMode mode = DeploymentMode::colocated;
    int subcarriers = 64;
    int overlap = 4;
    int users = 8;
    double sample_rate_hz = 15.36e6;
    double rms_delay_min_ns = 90.0;
    double rms_delay_max_ns = 110.0;

    // co-located
    int antennas = 64;
    double snr_db = 0.0; // per-antenna transmit power over receiver noise

    // cell-free
    int aps = 36;
    int antennas_per_ap = 4;
    double area_km = 2.0;
    double p_max_w = 0.25;
    double uplink_power_w = 0.25;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 9.0;
    double temperature_k = 290.0;
    double shadowing_db = 8.0;
    double ap_threshold_db = -std::numeric_limits<double>::infinity();
    PowerScheme power_allocation = PowerScheme::max;
    double nu = 0.6;
    double gamma = 1.2;

    // prefilter
    bool fsp_enabled = true;
    int fsp_length = 5;
    FspMode fsp_mode = FspMode::zf;
    double fsp_noise_weight = 0.0;

    // imperfections
    Impairment impairment = Impairment::perfect;
    Compensation compensation = Compensation::none;
    double pilot_boost_db = 10.0;
    bool debias_pdp = true;
    CorrectionForm correction_form = CorrectionForm::with_beta;
    double xi_min = 0.98;
    double xi_max = 1.02;
    double phi_max_rad = 2.0 * kPi / 9.0;
    double calibration_energy = 0.9999;

    // evaluation
    bool single_tap = true; // also evaluate the L_FSP = 1 prefilter
    bool ofdm = true;
    int mc_slots = 0;       // > 0 adds a symbol-level Monte-Carlo estimate
    int neighbor_reach = 1;

    // run control
    int trials = 100;
    std::uint64_t seed = 1;
    int threads = 1;

    bool operator==(const ScenarioConfig &) const = default;

    int total_antennas() const { return mode == DeploymentMode::colocated ? antennas : aps * antennas_per_ap; }
    bool has_estimation_error() const { return impairment == Impairment::est_error || impairment == Impairment::both; }
    bool has_reciprocity_error() const
    {
        return impairment == Impairment::reciprocity || impairment == Impairment::both;
    }
    CalibrationRanges calibration() const { return {xi_min, xi_max, phi_max_rad}; }
};

/// Throws ConfigError describing the first inconsistency.
void validate(const ScenarioConfig &cfg);

/// Unknown keys and wrong types are rejected. Missing keys keep defaults.
ScenarioConfig config_from_json(const nlohmann::json &j);
nlohmann::json config_to_json(const ScenarioConfig &cfg);
ScenarioConfig load_config(const std::filesystem::path &path);

/// Numeric keys that sweep() accepts.
const std::vector<std::string> &sweepable_keys();
ScenarioConfig with_value(const ScenarioConfig &cfg, const std::string &key, double value);

/// Seed of trial t: a splitmix64 mix of (seed, t).
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

struct TrialResult {
    double sinr_fsp_db = 0.0;    // configured prefilter
    double sinr_1tap_db = 0.0;   // L_FSP = 1 (if enabled)
    double sinr_ofdm_db = 0.0;   // (if enabled)
    double sinr_mc_db = 0.0;     // symbol-level estimate of the configured link (if enabled)
    double sir_fsp_db = 0.0;
    double mean_service_antennas = 0.0;
    double mean_service_aps = 0.0;
    double max_antenna_power_w = 0.0; // cell-free only
    double max_allocated_power_w = 0.0;
    RVec user_sir_db;
    RVec user_sinr_db;
};

/// Everything built for one realization; exposed for tests and tools.
struct TrialLinks {
    LinkSetup fsp;       // configured prefilter
    LinkSetup single_tap;
    ChannelRealization downlink;
    std::vector<Eigen::MatrixXcd> weights;
    Eigen::MatrixXcd ofdm_receiver_gain; // empty unless referenced with a gain
    double noise_variance = 0.0;
    SinrConvention convention = SinrConvention::referenced;
    ServiceSets sets;
    PowerAllocation power;
};

TrialLinks build_trial(const ScenarioConfig &cfg, const PrototypeFilter &proto, std::uint64_t seed);
TrialResult run_trial(const ScenarioConfig &cfg, const PrototypeFilter &proto, std::uint64_t seed);

struct RunSummary {
    ScenarioConfig config;
    std::vector<TrialResult> trials;

    double sinr_fsp_db = 0.0; // dB of the mean linear per-trial values
    double sinr_1tap_db = 0.0;
    double sinr_ofdm_db = 0.0;
    double sinr_mc_db = 0.0;
    double sir_fsp_db = 0.0;
    double mean_service_antennas = 0.0;
    double mean_service_aps = 0.0;
    double max_antenna_power_w = 0.0;
    double sir_iqr_db = 0.0; // over all per-user SIR samples
};

/// Runs all trials (in parallel when cfg.threads > 1) without touching disk.
RunSummary simulate(const ScenarioConfig &cfg);

/// simulate() plus trials.csv, users.csv, summary.csv and manifest.json in out_dir.
RunSummary run_scenario(const ScenarioConfig &cfg, const std::filesystem::path &out_dir);

/// One simulate() per value; sweep.csv has the axis column followed by the
/// summary columns. Also writes manifest.json.
std::vector<RunSummary> sweep(const ScenarioConfig &cfg, const std::string &axis, const std::vector<double> &values,
                              const std::filesystem::path &out_dir);

nlohmann::json manifest_json(const ScenarioConfig &cfg);

} // namespace fbmc
