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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace fbmc {

namespace {

using nlohmann::json;

template <typename E> struct EnumNames;

template <> struct EnumNames<DeploymentMode> {
    static constexpr std::pair<DeploymentMode, const char *> table[] = {{DeploymentMode::colocated, "colocated"},
                                                                        {DeploymentMode::cellfree, "cellfree"}};
};
template <> struct EnumNames<FspMode> {
    static constexpr std::pair<FspMode, const char *> table[] = {{FspMode::zf, "zf"}, {FspMode::mmse, "mmse"}};
};
template <> struct EnumNames<Impairment> {
    static constexpr std::pair<Impairment, const char *> table[] = {{Impairment::perfect, "perfect"},
                                                                    {Impairment::est_error, "est_error"},
                                                                    {Impairment::reciprocity, "reciprocity"},
                                                                    {Impairment::both, "both"}};
};
template <> struct EnumNames<Compensation> {
    static constexpr std::pair<Compensation, const char *> table[] = {
        {Compensation::none, "none"},
        {Compensation::statistical, "statistical"},
        {Compensation::downlink_pilot, "downlink_pilot"},
        {Compensation::correction_term, "correction_term"}};
};
template <> struct EnumNames<PowerScheme> {
    static constexpr std::pair<PowerScheme, const char *> table[] = {{PowerScheme::max, "max"},
                                                                     {PowerScheme::fractional, "fractional"}};
};
template <> struct EnumNames<CorrectionForm> {
    static constexpr std::pair<CorrectionForm, const char *> table[] = {{CorrectionForm::with_beta, "with_beta"},
                                                                        {CorrectionForm::unit_beta, "unit_beta"}};
};

template <typename E> std::string enum_to_string(E value)
{
    for (const auto &[v, name] : EnumNames<E>::table)
        if (v == value)
            return name;
    throw ConfigError("unknown enum value");
}

template <typename E> E enum_from_json(const json &j, const std::string &key)
{
    if (!j.is_string())
        throw ConfigError("config: '" + key + "' must be a string");
    const std::string s = j.get<std::string>();
    std::string allowed;
    for (const auto &[v, name] : EnumNames<E>::table)
    {
        if (s == name)
            return v;
        allowed += std::string(allowed.empty() ? "" : ", ") + name;
    }
    throw ConfigError("config: '" + key + "' must be one of " + allowed + " (got '" + s + "')");
}

double number(const json &j, const std::string &key)
{
    if (!j.is_number())
        throw ConfigError("config: '" + key + "' must be a number");
    return j.get<double>();
}

int integer(const json &j, const std::string &key)
{
    if (!j.is_number_integer())
    {
        if (j.is_number_float())
        {
            const double v = j.get<double>();
            if (v == std::floor(v) && std::abs(v) < 2e9)
                return static_cast<int>(v);
        }
        throw ConfigError("config: '" + key + "' must be an integer");
    }
    return j.get<int>();
}

bool boolean(const json &j, const std::string &key)
{
    if (!j.is_boolean())
        throw ConfigError("config: '" + key + "' must be true or false");
    return j.get<bool>();
}

// One entry per JSON key: reader and writer.
struct Field {
    const char *key;
    void (*read)(ScenarioConfig &, const json &, const std::string &);
    json (*write)(const ScenarioConfig &);
    bool sweepable;
};

#define FBMC_NUM(name)                                                                                               \
    Field                                                                                                              \
    {                                                                                                                  \
        #name, [](ScenarioConfig &c, const json &j, const std::string &k) { c.name = number(j, k); },                 \
            [](const ScenarioConfig &c) { return json(c.name); }, true                                                \
    }
#define FBMC_INT(name)                                                                                               \
    Field                                                                                                              \
    {                                                                                                                  \
        #name, [](ScenarioConfig &c, const json &j, const std::string &k) { c.name = integer(j, k); },                \
            [](const ScenarioConfig &c) { return json(c.name); }, true                                                \
    }
#define FBMC_BOOL(name)                                                                                              \
    Field                                                                                                              \
    {                                                                                                                  \
        #name, [](ScenarioConfig &c, const json &j, const std::string &k) { c.name = boolean(j, k); },                \
            [](const ScenarioConfig &c) { return json(c.name); }, false                                               \
    }
#define FBMC_ENUM(name, type)                                                                                        \
    Field                                                                                                              \
    {                                                                                                                  \
        #name, [](ScenarioConfig &c, const json &j, const std::string &k) { c.name = enum_from_json<type>(j, k); },   \
            [](const ScenarioConfig &c) { return json(enum_to_string(c.name)); }, false                               \
    }

const std::vector<Field> &fields()
{
    static const std::vector<Field> table = {
        FBMC_ENUM(mode, DeploymentMode),
        FBMC_INT(subcarriers),
        FBMC_INT(overlap),
        FBMC_INT(users),
        FBMC_NUM(sample_rate_hz),
        FBMC_NUM(rms_delay_min_ns),
        FBMC_NUM(rms_delay_max_ns),
        FBMC_INT(antennas),
        FBMC_NUM(snr_db),
        FBMC_INT(aps),
        FBMC_INT(antennas_per_ap),
        FBMC_NUM(area_km),
        FBMC_NUM(p_max_w),
        FBMC_NUM(uplink_power_w),
        FBMC_NUM(bandwidth_hz),
        FBMC_NUM(noise_figure_db),
        FBMC_NUM(temperature_k),
        FBMC_NUM(shadowing_db),
        // null encodes "no threshold" (every AP serves every user)
        Field{"ap_threshold_db",
              [](ScenarioConfig &c, const json &j, const std::string &k) {
                  c.ap_threshold_db = j.is_null() ? -std::numeric_limits<double>::infinity() : number(j, k);
              },
              [](const ScenarioConfig &c) { return std::isfinite(c.ap_threshold_db) ? json(c.ap_threshold_db) : json(); },
              true},
        FBMC_ENUM(power_allocation, PowerScheme),
        FBMC_NUM(nu),
        FBMC_NUM(gamma),
        FBMC_BOOL(fsp_enabled),
        FBMC_INT(fsp_length),
        FBMC_ENUM(fsp_mode, FspMode),
        FBMC_NUM(fsp_noise_weight),
        FBMC_ENUM(impairment, Impairment),
        FBMC_ENUM(compensation, Compensation),
        FBMC_NUM(pilot_boost_db),
        FBMC_BOOL(debias_pdp),
        FBMC_ENUM(correction_form, CorrectionForm),
        FBMC_NUM(xi_min),
        FBMC_NUM(xi_max),
        FBMC_NUM(phi_max_rad),
        FBMC_NUM(calibration_energy),
        FBMC_BOOL(single_tap),
        FBMC_BOOL(ofdm),
        FBMC_INT(mc_slots),
        FBMC_INT(neighbor_reach),
        FBMC_INT(trials),
        Field{"seed",
              [](ScenarioConfig &c, const json &j, const std::string &k) {
                  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
                      throw ConfigError("config: '" + k + "' must be a non-negative integer");
                  c.seed = j.get<std::uint64_t>();
              },
              [](const ScenarioConfig &c) { return json(c.seed); }, false},
        FBMC_INT(threads),
    };
    return table;
}

#undef FBMC_NUM
#undef FBMC_INT
#undef FBMC_BOOL
#undef FBMC_ENUM

} // namespace

void validate(const ScenarioConfig &c)
{
    auto fail = [](const std::string &msg) { throw ConfigError("config: " + msg); };
    if (c.subcarriers < 2 || c.subcarriers % 2 != 0)
        fail("subcarriers must be even and >= 2");
    if (c.overlap < 2 || c.overlap > 4)
        fail("overlap must be 2, 3 or 4");
    if (c.users < 1)
        fail("users must be >= 1");
    if (!(c.sample_rate_hz > 0.0))
        fail("sample_rate_hz must be positive");
    if (!(c.rms_delay_min_ns > 0.0) || c.rms_delay_max_ns < c.rms_delay_min_ns)
        fail("rms delay range must satisfy 0 < min <= max");
    if (c.mode == DeploymentMode::colocated)
    {
        if (c.antennas < c.users)
            fail("zero forcing needs antennas >= users");
        if (c.compensation == Compensation::correction_term)
            fail("correction_term compensation applies to the cell-free mode only");
    }
    else
    {
        const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.aps))));
        if (c.aps < 1 || side * side != c.aps)
            fail("aps must be a perfect square (grid placement)");
        if (c.antennas_per_ap < 1)
            fail("antennas_per_ap must be >= 1");
        if (!(c.area_km > 0.0))
            fail("area_km must be positive");
        if (!(c.p_max_w > 0.0) || !(c.uplink_power_w > 0.0))
            fail("transmit powers must be positive");
        if (!(c.bandwidth_hz > 0.0) || !(c.temperature_k > 0.0))
            fail("bandwidth and temperature must be positive");
        if (c.shadowing_db < 0.0)
            fail("shadowing_db must be >= 0");
        if (c.compensation == Compensation::downlink_pilot)
            fail("downlink_pilot compensation is not applicable to the cell-free mode");
        if (c.compensation == Compensation::statistical)
            fail("statistical compensation is defined for the co-located mode; use correction_term");
    }
    if (c.fsp_length < 1)
        fail("fsp_length must be >= 1");
    if (c.fsp_noise_weight < 0.0)
        fail("fsp_noise_weight must be >= 0");
    if (c.xi_min <= 0.0 || c.xi_max < c.xi_min)
        fail("calibration magnitude range must satisfy 0 < xi_min <= xi_max");
    if (c.phi_max_rad < 0.0 || c.phi_max_rad > kPi)
        fail("phi_max_rad must lie in [0, pi]");
    if (!(c.calibration_energy > 0.0) || c.calibration_energy > 1.0)
        fail("calibration_energy must lie in (0, 1]");
    if (c.mc_slots < 0)
        fail("mc_slots must be >= 0");
    if (c.neighbor_reach < 0 || 2 * c.neighbor_reach + 1 > c.subcarriers)
        fail("neighbor_reach out of range");
    if (c.trials < 1)
        fail("trials must be >= 1");
    if (c.threads < 1)
        fail("threads must be >= 1");
}

ScenarioConfig config_from_json(const json &j)
{
    if (!j.is_object())
        throw ConfigError("config: top level must be a JSON object");
    ScenarioConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        const auto &tab = fields();
        const auto f = std::find_if(tab.begin(), tab.end(), [&](const Field &x) { return it.key() == x.key; });
        if (f == tab.end())
            throw ConfigError("config: unknown key '" + it.key() + "'");
        f->read(cfg, it.value(), it.key());
    }
    return cfg;
}

json config_to_json(const ScenarioConfig &cfg)
{
    json j = json::object();
    for (const Field &f : fields())
        j[f.key] = f.write(cfg);
    return j;
}

ScenarioConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path.string() + "'");
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

const std::vector<std::string> &sweepable_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const Field &f : fields())
            if (f.sweepable)
                k.emplace_back(f.key);
        return k;
    }();
    return keys;
}

ScenarioConfig with_value(const ScenarioConfig &cfg, const std::string &key, double value)
{
    const auto &keys = sweepable_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError("sweep: '" + key + "' is not a numeric configuration key");
    json j = config_to_json(cfg);
    if (j[key].is_number_integer())
    {
        if (value != std::floor(value))
            throw ConfigError("sweep: '" + key + "' takes integer values");
        j[key] = static_cast<long long>(value);
    }
    else
        j[key] = value;
    return config_from_json(j);
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(seed ^ mix(trial));
}

} // namespace fbmc
