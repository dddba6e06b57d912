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

// Statistical channel generation: TDL-C power-delay profiles, Rayleigh taps,
// COST-Hata large-scale gains and the cell-free geometry on a torus.

#pragma once

#include "fbmc/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

namespace fbmc {

struct PowerDelayProfile {
    RVec taps; // linear power per sample delay

    int length() const { return static_cast<int>(taps.size()); }
    double total_gain() const;
};

struct TdlTap {
    double normalized_delay;
    double power_db;
};

/// Parse "normalized_delay power_db" rows; '#' starts a comment.
std::vector<TdlTap> parse_tdl_table(std::string_view text);
/// The 24-tap TDL-C table compiled into the library.
const std::vector<TdlTap> &tdlc_table();

/// TDL-C delays scaled by rms_delay_ns and binned to the nearest sample,
/// powers summed per bin, normalized to unit sum.
PowerDelayProfile tdlc_pdp(double rms_delay_ns, double sample_rate_hz);

/// Impulse responses h_{k,i}[l] for K users and N antennas, all padded to a
/// common length. betas(k, i) is the large-scale gain of the link.
class ChannelRealization {
  public:
    ChannelRealization() = default;
    ChannelRealization(int num_users, int num_antennas, int length);

    int num_users() const { return K_; }
    int num_antennas() const { return N_; }
    int length() const { return L_; }

    std::span<cplx> link(int k, int i) { return {data_.data() + offset(k, i), static_cast<std::size_t>(L_)}; }
    std::span<const cplx> link(int k, int i) const
    {
        return {data_.data() + offset(k, i), static_cast<std::size_t>(L_)};
    }
    cplx &tap(int k, int i, int l) { return data_[offset(k, i) + l]; }
    cplx tap(int k, int i, int l) const { return data_[offset(k, i) + l]; }

    /// K x N matrix of H_m(k, i) = sum_l h_{k,i}[l] exp(-j 2 pi m l / M).
    Eigen::MatrixXcd frequency_matrix(int m, int M) const;

    Eigen::MatrixXd betas;                // K x N
    std::vector<PowerDelayProfile> pdps;  // per link, index k * N + i (normalized)

  private:
    std::size_t offset(int k, int i) const { return (static_cast<std::size_t>(k) * N_ + i) * L_; }

    int K_ = 0;
    int N_ = 0;
    int L_ = 0;
    std::vector<cplx> data_;
};

/// Taps CN(0, beta(k,i) p_{k,i}[l]). link_pdps holds K*N profiles (index
/// k * N + i) or K profiles shared across antennas.
ChannelRealization draw_channel(const std::vector<PowerDelayProfile> &link_pdps, const Eigen::MatrixXd &betas,
                                Rng &rng);

/// H_m = sum_l h[l] exp(-j 2 pi m l / M). Requires L <= M.
cplx freq_response(std::span<const cplx> h, int m, int M);
/// DTFT at normalized frequency nu (cycles per sample), any length.
cplx dtft(std::span<const cplx> h, double nu);

inline constexpr double kMinLinkDistanceKm = 0.01;

/// 10 log10 beta = -135 - 35 log10(d) - X. d is clamped to 10 m.
double cost_hata_beta(double distance_km, double shadow_db);

inline constexpr double kBoltzmann = 1.3e-23; // J/K, value used by the reference setup

/// Thermal noise power T kB B NF in watts.
double noise_variance(double bandwidth_hz, double noise_figure_db, double temperature_k = 290.0);

struct Point {
    double x;
    double y;
};

double torus_distance(Point a, Point b, double side);

struct CellFreeGeometry {
    std::vector<Point> ap_positions;   // km
    std::vector<Point> user_positions; // km
    double area_side_km = 0.0;
    int antennas_per_ap = 1;

    int num_aps() const { return static_cast<int>(ap_positions.size()); }
    int num_antennas() const { return num_aps() * antennas_per_ap; }
    int ap_of_antenna(int i) const { return i / antennas_per_ap; }
    /// K x N_AP wrap-around distances, floored at 10 m.
    Eigen::MatrixXd distances_km() const;
};

/// APs on a sqrt(n_ap) x sqrt(n_ap) grid (cell centres), users uniform.
CellFreeGeometry place_cellfree(int n_ap, double area_km, int antennas_per_ap, int num_users, Rng &rng);

/// K x (N_AP Q) antenna-level large-scale gains: one shadowing draw (real,
/// std shadow_std_db) per user/AP pair, shared by the AP's antennas.
Eigen::MatrixXd cellfree_betas(const CellFreeGeometry &geo, double shadow_std_db, Rng &rng);

} // namespace fbmc
