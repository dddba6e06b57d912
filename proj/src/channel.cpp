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

#include "fbmc/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

namespace fbmc {

namespace detail {
extern const std::string_view kTdlCTableText;
}

double PowerDelayProfile::total_gain() const { return std::accumulate(taps.begin(), taps.end(), 0.0); }

std::vector<TdlTap> parse_tdl_table(std::string_view text)
{
    std::vector<TdlTap> rows;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size())
    {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::size_t used = 0;
        TdlTap tap{};
        try
        {
            tap.normalized_delay = std::stod(line, &used);
            tap.power_db = std::stod(line.substr(used));
        }
        catch (const std::exception &)
        {
            throw ConfigError("TDL table: malformed line " + std::to_string(line_no));
        }
        if (tap.normalized_delay < 0.0)
            throw ConfigError("TDL table: negative delay on line " + std::to_string(line_no));
        rows.push_back(tap);
    }
    if (rows.empty())
        throw ConfigError("TDL table: no taps");
    return rows;
}

const std::vector<TdlTap> &tdlc_table()
{
    static const std::vector<TdlTap> table = parse_tdl_table(detail::kTdlCTableText);
    return table;
}

PowerDelayProfile tdlc_pdp(double rms_delay_ns, double sample_rate_hz)
{
    if (!(rms_delay_ns > 0.0))
        throw ConfigError("tdlc_pdp: rms delay must be positive");
    if (!(sample_rate_hz > 0.0))
        throw ConfigError("tdlc_pdp: sample rate must be positive");

    const double scale = rms_delay_ns * 1e-9 * sample_rate_hz;
    PowerDelayProfile pdp;
    for (const TdlTap &t : tdlc_table())
    {
        const auto bin = static_cast<std::size_t>(std::lround(t.normalized_delay * scale));
        if (bin >= pdp.taps.size())
            pdp.taps.resize(bin + 1, 0.0);
        pdp.taps[bin] += db_to_linear(t.power_db);
    }
    const double total = pdp.total_gain();
    for (double &p : pdp.taps)
        p /= total;
    return pdp;
}

ChannelRealization::ChannelRealization(int num_users, int num_antennas, int length)
    : betas(Eigen::MatrixXd::Ones(num_users, num_antennas)), K_(num_users), N_(num_antennas), L_(length),
      data_(static_cast<std::size_t>(num_users) * num_antennas * length)
{
}

Eigen::MatrixXcd ChannelRealization::frequency_matrix(int m, int M) const
{
    Eigen::MatrixXcd H(K_, N_);
    CVec w(L_);
    for (int l = 0; l < L_; ++l)
        w[l] = std::polar(1.0, -2.0 * kPi * static_cast<double>((static_cast<long>(m) * l) % M) / M);
    for (int k = 0; k < K_; ++k)
        for (int i = 0; i < N_; ++i)
        {
            const cplx *h = data_.data() + offset(k, i);
            cplx acc = 0.0;
            for (int l = 0; l < L_; ++l)
                acc += h[l] * w[l];
            H(k, i) = acc;
        }
    return H;
}

ChannelRealization draw_channel(const std::vector<PowerDelayProfile> &link_pdps, const Eigen::MatrixXd &betas,
                                Rng &rng)
{
    const int K = static_cast<int>(betas.rows());
    const int N = static_cast<int>(betas.cols());
    const bool per_user = static_cast<int>(link_pdps.size()) == K;
    if (!per_user && static_cast<int>(link_pdps.size()) != K * N)
        throw ConfigError("draw_channel: need K or K*N power-delay profiles");

    int L = 1;
    for (const auto &p : link_pdps)
        L = std::max(L, p.length());

    ChannelRealization ch(K, N, L);
    ch.betas = betas;
    ch.pdps.reserve(static_cast<std::size_t>(K) * N);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < N; ++i)
        {
            const PowerDelayProfile &p = per_user ? link_pdps[k] : link_pdps[static_cast<std::size_t>(k) * N + i];
            ch.pdps.push_back(p);
            for (int l = 0; l < p.length(); ++l)
                ch.tap(k, i, l) = complex_normal(rng, betas(k, i) * p.taps[l]);
        }
    return ch;
}

cplx freq_response(std::span<const cplx> h, int m, int M)
{
    if (static_cast<int>(h.size()) > M)
        throw ConfigError("freq_response: impulse response longer than the DFT size");
    cplx acc = 0.0;
    for (std::size_t l = 0; l < h.size(); ++l)
        acc += h[l] * std::polar(1.0, -2.0 * kPi * static_cast<double>((static_cast<long>(m) * l) % M) / M);
    return acc;
}

cplx dtft(std::span<const cplx> h, double nu)
{
    cplx acc = 0.0;
    for (std::size_t l = 0; l < h.size(); ++l)
        acc += h[l] * std::polar(1.0, -2.0 * kPi * nu * static_cast<double>(l));
    return acc;
}

double cost_hata_beta(double distance_km, double shadow_db)
{
    const double d = std::max(distance_km, kMinLinkDistanceKm);
    return db_to_linear(-135.0 - 35.0 * std::log10(d) - shadow_db);
}

double noise_variance(double bandwidth_hz, double noise_figure_db, double temperature_k)
{
    if (!(bandwidth_hz > 0.0) || !(temperature_k > 0.0))
        throw ConfigError("noise_variance: bandwidth and temperature must be positive");
    return temperature_k * kBoltzmann * bandwidth_hz * db_to_linear(noise_figure_db);
}

double torus_distance(Point a, Point b, double side)
{
    double dx = std::fmod(std::abs(a.x - b.x), side);
    double dy = std::fmod(std::abs(a.y - b.y), side);
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
    return std::hypot(dx, dy);
}

Eigen::MatrixXd CellFreeGeometry::distances_km() const
{
    Eigen::MatrixXd d(user_positions.size(), ap_positions.size());
    for (std::size_t k = 0; k < user_positions.size(); ++k)
        for (std::size_t a = 0; a < ap_positions.size(); ++a)
            d(k, a) = std::max(torus_distance(user_positions[k], ap_positions[a], area_side_km), kMinLinkDistanceKm);
    return d;
}

CellFreeGeometry place_cellfree(int n_ap, double area_km, int antennas_per_ap, int num_users, Rng &rng)
{
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_ap))));
    if (n_ap < 1 || side * side != n_ap)
        throw ConfigError("place_cellfree: number of APs must be a perfect square, got " + std::to_string(n_ap));
    if (!(area_km > 0.0) || antennas_per_ap < 1 || num_users < 0)
        throw ConfigError("place_cellfree: invalid area, antenna or user count");

    CellFreeGeometry geo;
    geo.area_side_km = area_km;
    geo.antennas_per_ap = antennas_per_ap;
    const double spacing = area_km / side;
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            geo.ap_positions.push_back({(c + 0.5) * spacing, (r + 0.5) * spacing});
    std::uniform_real_distribution<double> u(0.0, area_km);
    for (int k = 0; k < num_users; ++k)
    {
        const double x = u(rng);
        const double y = u(rng);
        geo.user_positions.push_back({x, y});
    }
    return geo;
}

Eigen::MatrixXd cellfree_betas(const CellFreeGeometry &geo, double shadow_std_db, Rng &rng)
{
    const Eigen::MatrixXd d = geo.distances_km();
    const int K = static_cast<int>(d.rows());
    const int Q = geo.antennas_per_ap;
    Eigen::MatrixXd betas(K, geo.num_antennas());
    std::normal_distribution<double> shadow(0.0, shadow_std_db);
    for (int k = 0; k < K; ++k)
        for (int a = 0; a < geo.num_aps(); ++a)
        {
            const double beta = cost_hata_beta(d(k, a), shadow(rng));
            for (int q = 0; q < Q; ++q)
                betas(k, a * Q + q) = beta;
        }
    return betas;
}

} // namespace fbmc
