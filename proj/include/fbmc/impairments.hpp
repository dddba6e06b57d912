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

// Channel-estimation error and reciprocity-calibration error models.

#pragma once

#include "fbmc/channel.hpp"
#include "fbmc/types.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fbmc {

struct EstimationErrorModel {
    double sigma_et2 = 0.0; // per-tap time-domain error variance
    int channel_length = 1; // L
    int num_users = 1;      // K

    double sigma_ef2() const { return channel_length * sigma_et2; }
};

/// sigma_et^2 = sigma_noise^2 / (K L pilot_boost): the uplink pilot budget
/// spread over K users and L unknown taps.
double sigma_et2_from_pilot(double noise_variance, int num_users, int channel_length, double pilot_boost_linear);

struct CalibrationRanges {
    double xi_lo = 0.98;
    double xi_hi = 1.02;
    double phi_max = 2.0 * kPi / 9.0; // phase uniform in [-phi_max, phi_max]
};

/// Per-antenna, per-subcarrier complex gains for the transmit and receive
/// chains plus their length-M impulse responses c[l] = IDFT{gain}.
struct CalibrationProfile {
    Eigen::MatrixXcd tx_gain; // N x M
    Eigen::MatrixXcd rx_gain; // N x M
    std::vector<CVec> tx_impulse;
    std::vector<CVec> rx_impulse;

    int num_antennas() const { return static_cast<int>(tx_gain.rows()); }
    int num_subcarriers() const { return static_cast<int>(tx_gain.cols()); }
};

CalibrationProfile draw_calibration(int num_antennas, int M, const CalibrationRanges &ranges, Rng &rng);

/// c[l] = (1/M) sum_m gain[m] exp(j 2 pi m l / M)
CVec calibration_impulse(const Eigen::VectorXcd &gains);

enum class LinkDirection { uplink, downlink };

/// h^u = h * c_r, h^d = c_t * h per antenna. The calibration response is cut
/// to the shortest prefix holding energy_fraction of its energy (1 keeps all
/// M taps); the result has length L + L_c - 1.
ChannelRealization apply_reciprocity(const ChannelRealization &h, const CalibrationProfile &cal, LinkDirection dir,
                                     double energy_fraction = 1.0);

/// h_hat = h + dh, dh ~ CN(0, sigma_et^2) on the first model.channel_length
/// taps of every link (clipped to the stored length).
ChannelRealization add_estimation_error(const ChannelRealization &h, const EstimationErrorModel &model, Rng &rng);

/// lambda = E{xi} E{exp(j phi)} = mean(xi) sin(a)/a for phi uniform in [-a, a].
double lambda_stat(const CalibrationRanges &ranges);

} // namespace fbmc
