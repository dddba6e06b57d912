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
#include <numeric>

namespace fbmc {

namespace {

struct Imperfections {
    ChannelRealization uplink_estimate; // what the BS knows
    ChannelRealization downlink;        // what the signal sees
    double lambda = 1.0;
    double sigma_et2 = 0.0;
    int estimated_taps = 1;
};

Imperfections apply_imperfections(const ScenarioConfig &cfg, const ChannelRealization &h, double uplink_noise,
                                  Rng &rng)
{
    Imperfections imp;
    imp.estimated_taps = h.length();
    ChannelRealization uplink = h;
    imp.downlink = h;
    if (cfg.has_reciprocity_error())
    {
        const CalibrationProfile cal = draw_calibration(h.num_antennas(), cfg.subcarriers, cfg.calibration(), rng);
        uplink = apply_reciprocity(h, cal, LinkDirection::uplink, cfg.calibration_energy);
        imp.downlink = apply_reciprocity(h, cal, LinkDirection::downlink, cfg.calibration_energy);
        imp.lambda = lambda_stat(cfg.calibration());
    }
    if (cfg.has_estimation_error())
        imp.sigma_et2 = sigma_et2_from_pilot(uplink_noise, cfg.users, h.length(), db_to_linear(cfg.pilot_boost_db));
    imp.uplink_estimate = add_estimation_error(uplink, {imp.sigma_et2, h.length(), cfg.users}, rng);
    return imp;
}

std::vector<PowerDelayProfile> draw_pdps(const ScenarioConfig &cfg, int count, Rng &rng)
{
    std::uniform_real_distribution<double> rms(cfg.rms_delay_min_ns, cfg.rms_delay_max_ns);
    std::vector<PowerDelayProfile> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i)
        out.push_back(tdlc_pdp(rms(rng), cfg.sample_rate_hz));
    return out;
}

FspDesignSpec fsp_spec(const ScenarioConfig &cfg, int length)
{
    FspDesignSpec s;
    s.mode = cfg.fsp_mode;
    s.length = length;
    s.noise_weight = cfg.fsp_noise_weight;
    return s;
}

// Prefilter bank designed on a per-user power-delay profile (co-located).
std::vector<std::vector<CVec>> pdp_fsp_bank(const std::vector<PowerDelayProfile> &targets, const FspDesignSpec &spec,
                                            const PrototypeFilter &proto)
{
    const int M = proto.num_subcarriers();
    std::vector<std::vector<CVec>> bank(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k)
    {
        const CVec target(targets[k].taps.begin(), targets[k].taps.end());
        const CVec base = design_fsp(target, 0, spec, proto).taps;
        bank[k].reserve(M);
        for (int m = 0; m < M; ++m)
            bank[k].push_back(baseband_shift_fsp(base, m));
    }
    return bank;
}

// Prefilter bank designed on each estimated equivalent channel (cell-free),
// normalized by its gain at the subcarrier centre so the prefilter only
// reshapes the band.
std::vector<std::vector<CVec>> eqch_fsp_bank(const ScenarioConfig &cfg, const Imperfections &imp,
                                             const std::vector<Eigen::MatrixXcd> &P,
                                             const std::vector<Eigen::MatrixXcd> &W, const ServiceSets &sets,
                                             const FspDesignSpec &spec, const PrototypeFilter &proto)
{
    const int M = proto.num_subcarriers();
    const int K = cfg.users;
    std::vector<std::vector<CVec>> bank(K, std::vector<CVec>(M));
    const double sigma_ef2 = imp.estimated_taps * imp.sigma_et2;
    for (int k = 0; k < K; ++k)
    {
        const auto &B = sets.antennas[k];
        // common column scale c_k of the weights relative to the ZF precoder
        const double ck = W[0].col(k).norm() / std::max(P[0].col(k).norm(), 1e-300);
        Eigen::VectorXd sqrt_q = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(B.size()),
                                                           ck / static_cast<double>(B.size()));
        Eigen::VectorXd betas(static_cast<Eigen::Index>(B.size()));
        for (std::size_t j = 0; j < B.size(); ++j)
            betas(static_cast<Eigen::Index>(j)) = imp.uplink_estimate.betas(k, B[j]);
        for (int m = 0; m < M; ++m)
        {
            CVec h = equivalent_channel(W[m], imp.uplink_estimate, k, k);
            h.resize(std::min<std::size_t>(h.size(), static_cast<std::size_t>(imp.estimated_taps)));
            if (cfg.compensation == Compensation::correction_term)
                h = corrected_eqch_cellfree(h, sqrt_q, betas, imp.lambda, imp.sigma_et2, sigma_ef2, m, M, k, k,
                                            imp.estimated_taps);
            const cplx centre = dtft(h, static_cast<double>(m) / M);
            if (std::abs(centre) == 0.0)
                throw NumericalError("equivalent channel vanishes at the centre of subcarrier " + std::to_string(m));
            for (cplx &x : h)
                x /= centre;
            bank[k][m] = design_fsp(h, m, spec, proto).taps;
        }
    }
    return bank;
}

// LS gain from one block of M boosted pilots per user, demodulated with the
// link's gain and a Gaussian model of its interference plus noise.
Eigen::MatrixXd pilot_gains(const LinkBudget &b, double symbol_power, double boost, Rng &rng)
{
    const Eigen::Index K = b.gain.rows();
    const Eigen::Index M = b.gain.cols();
    Eigen::MatrixXd g(K, M);
    std::bernoulli_distribution coin(0.5);
    const double amp = std::sqrt(symbol_power * boost);
    RVec sent(M), received(M);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        for (Eigen::Index m = 0; m < M; ++m)
        {
            std::normal_distribution<double> err(0.0, std::sqrt(b.interference(k, m) + b.noise(k, m)));
            sent[m] = coin(rng) ? amp : -amp;
            received[m] = b.gain(k, m) * sent[m] + err(rng);
        }
        g.row(k).setConstant(estimate_downlink_gain(received, sent));
    }
    return g;
}

Eigen::MatrixXcd ofdm_pilot_gains(const ChannelRealization &downlink, const std::vector<Eigen::MatrixXcd> &W,
                                  double noise_variance, double boost, Rng &rng)
{
    const int M = static_cast<int>(W.size());
    const int K = downlink.num_users();
    Eigen::MatrixXcd g(K, M);
    std::vector<Eigen::MatrixXcd> G;
    G.reserve(M);
    for (int m = 0; m < M; ++m)
        G.push_back(downlink.frequency_matrix(m, M) * W[m]);
    const double amp = std::sqrt(boost);
    for (int k = 0; k < K; ++k)
    {
        cplx num = 0.0;
        double den = 0.0;
        for (int m = 0; m < M; ++m)
        {
            double leak = 0.0;
            for (int ks = 0; ks < K; ++ks)
                if (ks != k)
                    leak += std::norm(G[m](k, ks));
            const cplx r = G[m](k, k) * amp + complex_normal(rng, leak + noise_variance);
            num += r * amp;
            den += amp * amp;
        }
        g.row(k).setConstant(num / den);
    }
    return g;
}

} // namespace

TrialLinks build_trial(const ScenarioConfig &cfg, const PrototypeFilter &proto, std::uint64_t seed)
{
    validate(cfg);
    if (proto.num_subcarriers() != cfg.subcarriers || proto.overlap() != cfg.overlap)
        throw ConfigError("build_trial: prototype does not match the configuration");
    Rng rng(seed);
    const int K = cfg.users;
    const int M = cfg.subcarriers;
    const int N = cfg.total_antennas();

    TrialLinks out;
    Imperfections imp;
    std::vector<Eigen::MatrixXcd> P(M);
    std::vector<std::vector<CVec>> bank, bank1;

    if (cfg.mode == DeploymentMode::colocated)
    {
        const std::vector<PowerDelayProfile> pdps = draw_pdps(cfg, K, rng);
        const ChannelRealization h = draw_channel(pdps, Eigen::MatrixXd::Ones(K, N), rng);
        const double rho = db_to_linear(cfg.snr_db);
        imp = apply_imperfections(cfg, h, 1.0 / rho, rng);

        for (int m = 0; m < M; ++m)
            P[m] = zf(imp.uplink_estimate.frequency_matrix(m, M));
        // rho is the per-antenna transmit power over the receiver noise. The
        // ZF output is kept at unit gain and the noise is referred to it: a
        // common scale c with c^2 mean_m ||P_m||_F^2 = N puts unit average
        // power on every antenna, so sigma^2 = 1 / (rho c^2).
        double frob = 0.0;
        for (const auto &Pm : P)
            frob += Pm.squaredNorm();
        frob /= M;
        out.noise_variance = frob / (rho * N);
        out.weights = P;
        out.power = max_power(K, N, 1.0);
        out.power.q.setOnes();
        out.sets = ap_select(Eigen::MatrixXd::Zero(K, 1), -std::numeric_limits<double>::infinity(), N);
        out.convention = SinrConvention::referenced;

        // prefilter targets: true PDP under perfect CSI, otherwise the PDP
        // estimated from the uplink estimates, rescaled to the known gain
        std::vector<PowerDelayProfile> targets;
        const double sigma_ef2 = imp.estimated_taps * imp.sigma_et2;
        for (int k = 0; k < K; ++k)
        {
            PowerDelayProfile p = pdps[k];
            if (cfg.impairment != Impairment::perfect)
            {
                p = estimate_pdp(imp.uplink_estimate, k, imp.estimated_taps, cfg.debias_pdp ? imp.sigma_et2 : 0.0);
                const double total = p.total_gain();
                if (!(total > 0.0))
                    throw NumericalError("estimated power-delay profile is zero for user " + std::to_string(k));
                for (double &x : p.taps)
                    x /= total;
            }
            if (cfg.compensation == Compensation::statistical)
                p = corrected_pdp_colocated(p, 1.0, 1.0, imp.lambda, sigma_ef2, cfg.correction_form);
            targets.push_back(std::move(p));
        }
        if (cfg.fsp_enabled)
            bank = pdp_fsp_bank(targets, fsp_spec(cfg, cfg.fsp_length), proto);
        if (cfg.single_tap)
            bank1 = pdp_fsp_bank(targets, fsp_spec(cfg, 1), proto);

        if (cfg.compensation == Compensation::statistical)
        {
            const double f = colocated_correction_factor(1.0, 1.0, imp.lambda, sigma_ef2, cfg.correction_form);
            out.ofdm_receiver_gain = Eigen::MatrixXcd::Constant(K, M, cplx(f));
        }
    }
    else
    {
        const CellFreeGeometry geo = place_cellfree(cfg.aps, cfg.area_km, cfg.antennas_per_ap, K, rng);
        const Eigen::MatrixXd betas = cellfree_betas(geo, cfg.shadowing_db, rng);
        const std::vector<PowerDelayProfile> ap_pdps = draw_pdps(cfg, K * cfg.aps, rng);
        std::vector<PowerDelayProfile> link_pdps;
        link_pdps.reserve(static_cast<std::size_t>(K) * N);
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < N; ++i)
                link_pdps.push_back(ap_pdps[static_cast<std::size_t>(k) * cfg.aps + geo.ap_of_antenna(i)]);
        const ChannelRealization h = draw_channel(link_pdps, betas, rng);
        out.noise_variance = noise_variance(cfg.bandwidth_hz, cfg.noise_figure_db, cfg.temperature_k);
        imp = apply_imperfections(cfg, h, out.noise_variance / cfg.uplink_power_w, rng);

        Eigen::MatrixXd snr_db(K, cfg.aps);
        for (int k = 0; k < K; ++k)
            for (int a = 0; a < cfg.aps; ++a)
                snr_db(k, a) = linear_to_db(cfg.uplink_power_w * betas(k, a * cfg.antennas_per_ap) / out.noise_variance);
        out.sets = ap_select(snr_db, cfg.ap_threshold_db, cfg.antennas_per_ap);
        out.power = cfg.power_allocation == PowerScheme::fractional
                        ? fractional_power(betas, cfg.nu, cfg.gamma, cfg.p_max_w)
                        : max_power(K, N, cfg.p_max_w);

        for (int m = 0; m < M; ++m)
            P[m] = user_centric_zf(imp.uplink_estimate.frequency_matrix(m, M), out.sets);
        out.weights = cellfree_weights(P, out.power.q, out.sets, cfg.p_max_w);
        out.convention = SinrConvention::unbiased;

        if (cfg.fsp_enabled)
            bank = eqch_fsp_bank(cfg, imp, P, out.weights, out.sets, fsp_spec(cfg, cfg.fsp_length), proto);
        if (cfg.single_tap)
            bank1 = eqch_fsp_bank(cfg, imp, P, out.weights, out.sets, fsp_spec(cfg, 1), proto);
    }

    out.downlink = imp.downlink;
    auto make_link = [&](std::vector<std::vector<CVec>> fsp) {
        LinkSetup l;
        l.proto = &proto;
        l.downlink = out.downlink;
        l.weights = out.weights;
        l.fsp = std::move(fsp);
        l.noise_variance = out.noise_variance;
        l.convention = out.convention;
        l.neighbor_reach = cfg.neighbor_reach;
        return l;
    };
    out.fsp = make_link(std::move(bank));
    out.single_tap = make_link(std::move(bank1));

    if (cfg.compensation == Compensation::downlink_pilot)
    {
        const double boost = db_to_linear(cfg.pilot_boost_db);
        out.fsp.receiver_gain = pilot_gains(analytic_budget(out.fsp), out.fsp.symbol_power, boost, rng);
        if (cfg.single_tap)
            out.single_tap.receiver_gain =
                pilot_gains(analytic_budget(out.single_tap), out.single_tap.symbol_power, boost, rng);
        out.ofdm_receiver_gain = ofdm_pilot_gains(out.downlink, out.weights, out.noise_variance, boost, rng);
    }
    return out;
}

TrialResult run_trial(const ScenarioConfig &cfg, const PrototypeFilter &proto, std::uint64_t seed)
{
    TrialLinks links = build_trial(cfg, proto, seed);
    TrialResult r;

    const SinrReport main = analytic_sinr(links.fsp);
    r.sinr_fsp_db = main.mean_sinr_db();
    r.sir_fsp_db = main.mean_sir_db();
    r.user_sir_db = main.per_user_sir_db();
    r.user_sinr_db = main.per_user_sinr_db();
    if (cfg.single_tap)
        r.sinr_1tap_db = analytic_sinr(links.single_tap).mean_sinr_db();
    if (cfg.ofdm)
        r.sinr_ofdm_db = ofdm_baseline(links.downlink, links.weights, links.noise_variance, links.convention,
                                       links.downlink.length() - 1, links.ofdm_receiver_gain)
                             .mean_sinr_db();
    if (cfg.mc_slots > 0)
    {
        Rng mc_rng(trial_seed(seed, 0x6d63ULL));
        r.sinr_mc_db = mc_sinr(links.fsp, cfg.mc_slots, mc_rng).mean_sinr_db();
    }
    r.mean_service_antennas = links.sets.mean_set_size();
    double aps = 0.0;
    for (const auto &s : links.sets.aps)
        aps += static_cast<double>(s.size());
    r.mean_service_aps = aps / static_cast<double>(links.sets.aps.size());
    if (cfg.mode == DeploymentMode::cellfree)
    {
        r.max_antenna_power_w = radiated_power(links.weights).maxCoeff();
        r.max_allocated_power_w = links.power.per_antenna_power().maxCoeff();
    }
    return r;
}

} // namespace fbmc
