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

#include "fbmc/impairments.hpp"

#include <algorithm>
#include <cmath>

namespace fbmc {

double sigma_et2_from_pilot(double noise_variance, int num_users, int channel_length, double pilot_boost_linear)
{
    if (num_users < 1 || channel_length < 1 || !(pilot_boost_linear > 0.0))
        throw ConfigError("sigma_et2_from_pilot: invalid pilot parameters");
    return noise_variance / (static_cast<double>(num_users) * channel_length * pilot_boost_linear);
}

CVec calibration_impulse(const Eigen::VectorXcd &gains)
{
    const int M = static_cast<int>(gains.size());
    CVec c(M, cplx(0.0));
    for (int l = 0; l < M; ++l)
    {
        cplx acc = 0.0;
        for (int m = 0; m < M; ++m)
            acc += gains(m) * std::polar(1.0, 2.0 * kPi * static_cast<double>((static_cast<long>(m) * l) % M) / M);
        c[l] = acc / static_cast<double>(M);
    }
    return c;
}

CalibrationProfile draw_calibration(int num_antennas, int M, const CalibrationRanges &ranges, Rng &rng)
{
    if (ranges.xi_hi < ranges.xi_lo || ranges.phi_max < 0.0)
        throw ConfigError("draw_calibration: invalid error ranges");
    std::uniform_real_distribution<double> xi(ranges.xi_lo, ranges.xi_hi);
    std::uniform_real_distribution<double> phi(-ranges.phi_max, ranges.phi_max);

    CalibrationProfile cal;
    cal.tx_gain.resize(num_antennas, M);
    cal.rx_gain.resize(num_antennas, M);
    for (auto *g : {&cal.tx_gain, &cal.rx_gain})
        for (int i = 0; i < num_antennas; ++i)
            for (int m = 0; m < M; ++m)
            {
                const double mag = xi(rng);
                const double ph = phi(rng);
                (*g)(i, m) = std::polar(mag, ph);
            }
    for (int i = 0; i < num_antennas; ++i)
    {
        cal.tx_impulse.push_back(calibration_impulse(cal.tx_gain.row(i).transpose()));
        cal.rx_impulse.push_back(calibration_impulse(cal.rx_gain.row(i).transpose()));
    }
    return cal;
}

namespace {

int energy_prefix(const CVec &c, double fraction)
{
    if (fraction >= 1.0)
        return static_cast<int>(c.size());
    double total = 0.0;
    for (const cplx &z : c)
        total += std::norm(z);
    double acc = 0.0;
    for (std::size_t l = 0; l < c.size(); ++l)
    {
        acc += std::norm(c[l]);
        if (acc >= fraction * total)
            return static_cast<int>(l) + 1;
    }
    return static_cast<int>(c.size());
}

} // namespace

ChannelRealization apply_reciprocity(const ChannelRealization &h, const CalibrationProfile &cal, LinkDirection dir,
                                     double energy_fraction)
{
    if (cal.num_antennas() != h.num_antennas())
        throw ConfigError("apply_reciprocity: calibration covers " + std::to_string(cal.num_antennas()) +
                          " antennas, channel has " + std::to_string(h.num_antennas()));
    if (!(energy_fraction > 0.0))
        throw ConfigError("apply_reciprocity: energy fraction must be positive");
    if (dir != LinkDirection::uplink && dir != LinkDirection::downlink)
        throw ConfigError("apply_reciprocity: invalid direction");
    const auto &impulses = dir == LinkDirection::uplink ? cal.rx_impulse : cal.tx_impulse;

    int Lc = 1;
    std::vector<int> keep(h.num_antennas());
    for (int i = 0; i < h.num_antennas(); ++i)
    {
        keep[i] = energy_prefix(impulses[i], energy_fraction);
        Lc = std::max(Lc, keep[i]);
    }

    ChannelRealization out(h.num_users(), h.num_antennas(), h.length() + Lc - 1);
    out.betas = h.betas;
    out.pdps = h.pdps;
    for (int k = 0; k < h.num_users(); ++k)
        for (int i = 0; i < h.num_antennas(); ++i)
        {
            auto src = h.link(k, i);
            auto dst = out.link(k, i);
            const CVec &c = impulses[i];
            for (int l = 0; l < h.length(); ++l)
            {
                if (src[l] == cplx(0.0))
                    continue;
                for (int t = 0; t < keep[i]; ++t)
                    dst[l + t] += src[l] * c[t];
            }
        }
    return out;
}

ChannelRealization add_estimation_error(const ChannelRealization &h, const EstimationErrorModel &model, Rng &rng)
{
    if (model.sigma_et2 < 0.0)
        throw ConfigError("add_estimation_error: negative error variance");
    ChannelRealization out = h;
    if (model.sigma_et2 == 0.0)
        return out;
    const int L = std::min(model.channel_length, h.length());
    for (int k = 0; k < h.num_users(); ++k)
        for (int i = 0; i < h.num_antennas(); ++i)
            for (int l = 0; l < L; ++l)
                out.tap(k, i, l) += complex_normal(rng, model.sigma_et2);
    return out;
}

double lambda_stat(const CalibrationRanges &ranges)
{
    const double a = ranges.phi_max;
    const double mean_xi = 0.5 * (ranges.xi_lo + ranges.xi_hi);
    const double sinc = a < 1e-12 ? 1.0 : std::sin(a) / a;
    return mean_xi * sinc;
}

} // namespace fbmc
