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

// Linear precoders, power allocation and AP selection.
//
// Precoders are N x K with columns indexed by user, so that H P = I for ZF.
// The signal radiated by antenna i is sum_k W(i, k) s_k with
// W(i, k) = sqrt(q_{k,i}) P(i, k), and the equivalent channel from user k's
// stream to user r is h_eq[l] = sum_i W(i, k) h_{r,i}[l].

#pragma once

#include "fbmc/channel.hpp"
#include "fbmc/types.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace fbmc {

enum class PrecoderKind { zf, mrt };
enum class DeploymentMode { colocated, cellfree };

/// P = H^H D^{-1}, D = diag(sum_i |H(k, i)|^2).
Eigen::MatrixXcd mrt(const Eigen::MatrixXcd &H);

/// P = H^H (H H^H)^{-1}. Throws NumericalError when H is rank deficient.
Eigen::MatrixXcd zf(const Eigen::MatrixXcd &H);

/// Large-array limit: column k = conj(H row k) / (N beta_k) co-located (beta
/// taken from betas(k, 0)), or / sum_i beta_{k,i} cell-free.
Eigen::MatrixXcd asymptotic_precoder(const Eigen::MatrixXcd &H, const Eigen::MatrixXd &betas, DeploymentMode mode);

struct PowerAllocation {
    Eigen::MatrixXd q; // K x N
    double nu = 0.0;
    double gamma = 0.0;
    double p_max = 1.0;

    /// sum_k q_{k,i} per antenna.
    Eigen::VectorXd per_antenna_power() const { return q.colwise().sum().transpose(); }
};

/// Every user gets p_max / K from every antenna.
PowerAllocation max_power(int num_users, int num_antennas, double p_max);

/// q_{k,i} proportional to
///   beta_{k,i} / ( (sum_i' beta_{k,i'})^nu (sum_k' beta_{k',i} / (sum_i' beta_{k',i'})^nu)^gamma ),
/// with one global scale so the busiest antenna radiates exactly p_max.
PowerAllocation fractional_power(const Eigen::MatrixXd &betas, double nu, double gamma, double p_max);

struct ServiceSets {
    std::vector<std::vector<int>> aps;      // per user, selected AP indices
    std::vector<std::vector<int>> antennas; // per user, selected antenna indices
    double threshold_db = -std::numeric_limits<double>::infinity();

    double mean_set_size() const;
    /// K x N indicator.
    Eigen::MatrixXd mask(int num_antennas) const;
};

/// APs whose uplink SNR for user k reaches threshold_db; an empty set falls
/// back to the single strongest AP.
ServiceSets ap_select(const Eigen::MatrixXd &uplink_snr_db, double threshold_db, int antennas_per_ap);

/// ZF computed per user on the antennas of its service set: column k is the
/// k-th column of pinv(H(:, B_k)), zero outside B_k.
Eigen::MatrixXcd user_centric_zf(const Eigen::MatrixXcd &H, const ServiceSets &sets);

/// W(i, k) = sqrt(q(k, i)) P(i, k).
Eigen::MatrixXcd precoding_weights(const Eigen::MatrixXcd &P, const Eigen::MatrixXd &q);

/// Cell-free weights W_m(i, k) = s sqrt(q(k, i)) P_m(i, k) for i in B_k, zero
/// elsewhere. s is common to all links and puts the busiest antenna's
/// subcarrier-averaged radiated power at p_max.
std::vector<Eigen::MatrixXcd> cellfree_weights(const std::vector<Eigen::MatrixXcd> &P, const Eigen::MatrixXd &q,
                                               const ServiceSets &sets, double p_max);

/// Subcarrier-averaged radiated power per antenna, sum_k |W_m(i, k)|^2 / M.
Eigen::VectorXd radiated_power(const std::vector<Eigen::MatrixXcd> &W);

/// h_eq[l] = sum_i W(i, k_src) h_{k,i}[l].
CVec equivalent_channel(const Eigen::MatrixXcd &W, const ChannelRealization &h, int k, int k_src);

} // namespace fbmc
