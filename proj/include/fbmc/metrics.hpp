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

// SINR evaluation: closed form from transmultiplexer coefficients, symbol
// level Monte Carlo through the full waveform chain, OFDM baseline, CDFs.

#pragma once

#include "fbmc/channel.hpp"
#include "fbmc/core_dsp.hpp"
#include "fbmc/types.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fbmc {

inline constexpr double kSinrFloorDb = -100.0;
inline constexpr double kSinrCapDb = 100.0;

/// How the receiver scales its decisions.
///   referenced: d_hat / g_rx is compared with d, so a gain mismatch counts as
///               distortion (S = E{d^2}).
///   unbiased:   the best scalar alpha is fitted per (user, subcarrier) and
///               only the residual counts (S = alpha^2 E{d^2}).
enum class SinrConvention { referenced, unbiased };

struct SinrReport {
    Eigen::MatrixXd signal;       // K x M, linear
    Eigen::MatrixXd interference; // K x M
    Eigen::MatrixXd noise;        // K x M

    int num_users() const { return static_cast<int>(signal.rows()); }
    int num_subcarriers() const { return static_cast<int>(signal.cols()); }

    /// 10 log10(S / (I + N)) clamped to [floor, cap].
    Eigen::MatrixXd sinr_db() const;
    /// Mean of linear SINR over all users and subcarriers, in dB.
    double mean_sinr_db() const;
    /// Per user, mean over subcarriers of linear SIR, in dB.
    RVec per_user_sir_db() const;
    RVec per_user_sinr_db() const;
    double mean_sir_db() const;
};

double ratio_db(double num, double den);

/// Everything the downlink chain needs for one channel realization.
struct LinkSetup {
    const PrototypeFilter *proto = nullptr;
    ChannelRealization downlink;          // channel the signal travels through
    std::vector<Eigen::MatrixXcd> weights; // per subcarrier, N x K
    std::vector<std::vector<CVec>> fsp;   // [k][m]; an empty vector means no prefilter
    double noise_variance = 0.0;          // per complex sample at the receiver
    double symbol_power = 0.5;            // E{d^2}
    SinrConvention convention = SinrConvention::unbiased;
    Eigen::MatrixXd receiver_gain;        // K x M divisor (referenced only); empty = 1
    int neighbor_reach = 1;               // source subcarriers m - reach .. m + reach

    int num_users() const { return downlink.num_users(); }
    int num_subcarriers() const { return static_cast<int>(weights.size()); }
    void validate() const;
};

/// h_eq for all (k, k_src, m): index [(k * K + k_src) * M + m].
std::vector<CVec> all_equivalent_channels(const LinkSetup &link);

/// Closed-form decomposition per (k, m):
///   g = Re{g_{mm}^{kk}[0]}, I = E{d^2} sum over every other (k', m', n') of
///   Re{g}^2 averaged over even and odd target slots, N = sigma^2 / 2.
SinrReport analytic_sinr(const LinkSetup &link);

/// Per-(k, m) signal gain Re{g_{mm}^{kk}[0]} and interference-plus-noise,
/// before any receiver convention is applied.
struct LinkBudget {
    Eigen::MatrixXd gain;
    Eigen::MatrixXd interference;
    Eigen::MatrixXd noise;
};
LinkBudget analytic_budget(const LinkSetup &link);
SinrReport apply_convention(const LinkBudget &b, const LinkSetup &link);

/// Random OQAM frames through prefilter, precoder, per-antenna synthesis,
/// channel, noise and analysis. Statistics use slots away from the edges.
SinrReport mc_sinr(const LinkSetup &link, int num_slots, Rng &rng);

/// OFDM with a cyclic prefix covering the channel: flat subcarriers, unit
/// power complex symbols, per-subcarrier response G = H_m W_m.
/// receiver_gain as in LinkSetup (K x M, empty = 1).
SinrReport ofdm_baseline(const ChannelRealization &downlink, const std::vector<Eigen::MatrixXcd> &weights,
                         double noise_variance, SinrConvention convention, int cp_length,
                         const Eigen::MatrixXcd &receiver_gain = {});

struct Cdf {
    RVec values;        // sorted
    RVec probabilities; // (i + 1) / n

    double quantile(double p) const;
    double interquartile_range() const { return quantile(0.75) - quantile(0.25); }
};

Cdf sir_cdf(const RVec &samples);

} // namespace fbmc
