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

#include "fbmc/metrics.hpp"
#include "fbmc/fsp.hpp"
#include "fbmc/precoding.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>

namespace fbmc {

double ratio_db(double num, double den)
{
    if (!(num > 0.0))
        return kSinrFloorDb;
    if (!(den > 0.0))
        return kSinrCapDb;
    return std::clamp(linear_to_db(num / den), kSinrFloorDb, kSinrCapDb);
}

Eigen::MatrixXd SinrReport::sinr_db() const
{
    Eigen::MatrixXd out(signal.rows(), signal.cols());
    for (Eigen::Index k = 0; k < signal.rows(); ++k)
        for (Eigen::Index m = 0; m < signal.cols(); ++m)
            out(k, m) = ratio_db(signal(k, m), interference(k, m) + noise(k, m));
    return out;
}

namespace {
// linear mean of clamped per-cell ratios
double mean_ratio_db(const Eigen::MatrixXd &num, const Eigen::MatrixXd &den, Eigen::Index row = -1)
{
    double acc = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index k = 0; k < num.rows(); ++k)
    {
        if (row >= 0 && k != row)
            continue;
        for (Eigen::Index m = 0; m < num.cols(); ++m)
        {
            acc += db_to_linear(ratio_db(num(k, m), den(k, m)));
            ++count;
        }
    }
    return count ? linear_to_db(acc / static_cast<double>(count)) : kSinrFloorDb;
}
} // namespace

double SinrReport::mean_sinr_db() const { return mean_ratio_db(signal, interference + noise); }

double SinrReport::mean_sir_db() const { return mean_ratio_db(signal, interference); }

RVec SinrReport::per_user_sir_db() const
{
    RVec out(num_users());
    for (int k = 0; k < num_users(); ++k)
        out[k] = mean_ratio_db(signal, interference, k);
    return out;
}

RVec SinrReport::per_user_sinr_db() const
{
    RVec out(num_users());
    const Eigen::MatrixXd den = interference + noise;
    for (int k = 0; k < num_users(); ++k)
        out[k] = mean_ratio_db(signal, den, k);
    return out;
}

void LinkSetup::validate() const
{
    if (proto == nullptr)
        throw ConfigError("link: prototype filter missing");
    const int M = proto->num_subcarriers();
    if (num_subcarriers() != M)
        throw ConfigError("link: one precoder per subcarrier required");
    const int K = num_users();
    for (const auto &W : weights)
        if (W.rows() != downlink.num_antennas() || W.cols() != K)
            throw ConfigError("link: precoder dimensions do not match the channel");
    if (!fsp.empty())
    {
        if (static_cast<int>(fsp.size()) != K)
            throw ConfigError("link: prefilter bank needs one entry per user");
        for (const auto &per_user : fsp)
            if (static_cast<int>(per_user.size()) != M)
                throw ConfigError("link: prefilter bank needs one entry per subcarrier");
    }
    if (receiver_gain.size() != 0 && (receiver_gain.rows() != K || receiver_gain.cols() != M))
        throw ConfigError("link: receiver gain must be K x M");
    if (neighbor_reach < 0 || 2 * neighbor_reach + 1 > M)
        throw ConfigError("link: neighbour reach out of range");
}

std::vector<CVec> all_equivalent_channels(const LinkSetup &link)
{
    const int K = link.num_users();
    const int M = link.num_subcarriers();
    std::vector<CVec> out(static_cast<std::size_t>(K) * K * M);
    for (int k = 0; k < K; ++k)
        for (int ks = 0; ks < K; ++ks)
            for (int m = 0; m < M; ++m)
                out[(static_cast<std::size_t>(k) * K + ks) * M + m] = equivalent_channel(link.weights[m], link.downlink, k, ks);
    return out;
}

namespace {
std::span<const cplx> fsp_of(const LinkSetup &link, int k, int m)
{
    if (link.fsp.empty())
        return {};
    return link.fsp[k][m];
}
} // namespace

LinkBudget analytic_budget(const LinkSetup &link)
{
    link.validate();
    const PrototypeFilter &proto = *link.proto;
    const int K = link.num_users();
    const int M = link.num_subcarriers();
    const int reach = link.neighbor_reach;
    const std::vector<CVec> heq = all_equivalent_channels(link);

    LinkBudget b;
    b.gain = Eigen::MatrixXd::Zero(K, M);
    b.interference = Eigen::MatrixXd::Zero(K, M);
    b.noise = Eigen::MatrixXd::Constant(K, M, 0.5 * link.noise_variance);

    CVec z;
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < M; ++m)
        {
            double interf[2] = {0.0, 0.0};
            for (int ks = 0; ks < K; ++ks)
                for (int dm = -reach; dm <= reach; ++dm)
                {
                    const int ms = ((m + dm) % M + M) % M;
                    int v0 = 0;
                    const CVec c = fsp_channel_composite(fsp_of(link, ks, ms),
                                                         heq[(static_cast<std::size_t>(k) * K + ks) * M + ms], ms, M, v0);
                    const int extent = std::max(std::abs(v0), std::abs(v0 + static_cast<int>(c.size()) - 1));
                    const int W = response_window(proto, extent + 1);
                    z.assign(2 * W + 1, cplx(0.0));
                    ambiguity_projection(proto, c, v0, ms - m, -W, W, z);
                    for (int n = 0; n < 2; ++n)
                        for (int dn = -W; dn <= W; ++dn)
                        {
                            const double v = (oqam_link_phase(m, n, ms, n - dn) * z[dn + W]).real();
                            if (ks == k && dm == 0 && dn == 0)
                            {
                                if (n == 0)
                                    b.gain(k, m) = v;
                                continue;
                            }
                            interf[n] += v * v;
                        }
                }
            b.interference(k, m) = link.symbol_power * 0.5 * (interf[0] + interf[1]);
        }
    return b;
}

SinrReport apply_convention(const LinkBudget &b, const LinkSetup &link)
{
    SinrReport r;
    const double E = link.symbol_power;
    if (link.convention == SinrConvention::unbiased)
    {
        r.signal = E * b.gain.array().square();
        r.interference = b.interference;
        r.noise = b.noise;
        return r;
    }
    const Eigen::MatrixXd grx = link.receiver_gain.size() ? link.receiver_gain
                                                          : Eigen::MatrixXd::Ones(b.gain.rows(), b.gain.cols());
    r.signal = Eigen::MatrixXd::Constant(b.gain.rows(), b.gain.cols(), E);
    r.interference = E * (b.gain.array() / grx.array() - 1.0).square() + b.interference.array() / grx.array().square();
    r.noise = b.noise.array() / grx.array().square();
    return r;
}

SinrReport analytic_sinr(const LinkSetup &link) { return apply_convention(analytic_budget(link), link); }

namespace {
int next_pow2(std::size_t n)
{
    int p = 1;
    while (static_cast<std::size_t>(p) < n)
        p <<= 1;
    return p;
}
} // namespace

SinrReport mc_sinr(const LinkSetup &link, int num_slots, Rng &rng)
{
    link.validate();
    const PrototypeFilter &proto = *link.proto;
    const int K = link.num_users();
    const int M = link.num_subcarriers();
    const int N = link.downlink.num_antennas();
    const int Ld = link.downlink.length();
    int Lf = 1;
    for (const auto &per_user : link.fsp)
        for (const auto &t : per_user)
            Lf = std::max<int>(Lf, static_cast<int>(t.size()));
    const int margin = 2 * proto.overlap() + (Ld + M / 2 - 1) / (M / 2) + Lf + 2;
    if (num_slots < 2 * margin + 4)
        throw ConfigError("mc_sinr: need at least " + std::to_string(2 * margin + 4) + " slots");

    const double amp = std::sqrt(link.symbol_power);
    std::bernoulli_distribution coin(0.5);
    std::vector<SymbolPlane<double>> data(K, SymbolPlane<double>(M, num_slots));
    for (auto &plane : data)
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < num_slots; ++n)
                plane(m, n) = coin(rng) ? amp : -amp;

    // prefiltered streams, then per-antenna precoded planes
    std::vector<SymbolPlane<cplx>> streams(K, SymbolPlane<cplx>(M, num_slots));
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < M; ++m)
        {
            auto taps = fsp_of(link, k, m);
            auto row = streams[k].row(m);
            if (taps.empty())
            {
                auto src = data[k].row(m);
                std::copy(src.begin(), src.end(), row.begin());
            }
            else
            {
                const CVec y = apply_fsp(data[k].row(m), taps, m);
                std::copy(y.begin(), y.end(), row.begin());
            }
        }

    const std::size_t sig_len = static_cast<std::size_t>(num_slots - 1) * (M / 2) + proto.length();
    const std::size_t out_len = sig_len + Ld - 1;
    const int nfft = next_pow2(out_len);
    detail::Dft fwd(nfft, detail::Dft::Direction::forward);
    detail::Dft inv(nfft, detail::Dft::Direction::backward);

    std::vector<CVec> Xf(N, CVec(nfft));
    SymbolPlane<cplx> plane(M, num_slots);
    for (int i = 0; i < N; ++i)
    {
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < num_slots; ++n)
            {
                cplx acc = 0.0;
                for (int k = 0; k < K; ++k)
                    acc += link.weights[m](i, k) * streams[k](m, n);
                plane(m, n) = acc;
            }
        const ComplexSignal x = synthesize(plane, proto);
        CVec &buf = Xf[i];
        std::fill(buf.begin(), buf.end(), cplx(0.0));
        std::copy(x.samples.begin(), x.samples.end(), buf.begin());
        fwd.execute(buf.data(), buf.data());
    }

    SinrReport rep;
    rep.signal.resize(K, M);
    rep.interference.resize(K, M);
    rep.noise.resize(K, M);

    CVec acc(nfft), hbuf(nfft);
    for (int k = 0; k < K; ++k)
    {
        std::fill(acc.begin(), acc.end(), cplx(0.0));
        for (int i = 0; i < N; ++i)
        {
            std::fill(hbuf.begin(), hbuf.end(), cplx(0.0));
            auto h = link.downlink.link(k, i);
            std::copy(h.begin(), h.end(), hbuf.begin());
            fwd.execute(hbuf.data(), hbuf.data());
            for (int f = 0; f < nfft; ++f)
                acc[f] += Xf[i][f] * hbuf[f];
        }
        inv.execute(acc.data(), acc.data());
        ComplexSignal r;
        r.samples.resize(out_len);
        for (std::size_t l = 0; l < out_len; ++l)
            r.samples[l] = acc[l] / static_cast<double>(nfft) + complex_normal(rng, link.noise_variance);
        const SymbolPlane<double> dhat = analyze_all(r, proto, num_slots);

        for (int m = 0; m < M; ++m)
        {
            double sdd = 0.0, sd2 = 0.0, sh2 = 0.0;
            int count = 0;
            for (int n = margin; n < num_slots - margin; ++n)
            {
                const double d = data[k](m, n);
                const double y = dhat(m, n);
                sdd += y * d;
                sd2 += d * d;
                sh2 += y * y;
                ++count;
            }
            const double Ed2 = sd2 / count;
            const double noise = 0.5 * link.noise_variance;
            if (link.convention == SinrConvention::unbiased)
            {
                const double alpha = sdd / sd2;
                const double resid = std::max(sh2 / count - alpha * alpha * Ed2, 0.0);
                rep.signal(k, m) = alpha * alpha * Ed2;
                rep.noise(k, m) = noise;
                rep.interference(k, m) = std::max(resid - noise, 0.0);
            }
            else
            {
                const double g = link.receiver_gain.size() ? link.receiver_gain(k, m) : 1.0;
                // mean (y/g - d)^2
                const double err = (sh2 / (g * g) - 2.0 * sdd / g + sd2) / count;
                rep.signal(k, m) = Ed2;
                rep.noise(k, m) = noise / (g * g);
                rep.interference(k, m) = std::max(err - rep.noise(k, m), 0.0);
            }
        }
    }
    return rep;
}

SinrReport ofdm_baseline(const ChannelRealization &downlink, const std::vector<Eigen::MatrixXcd> &weights,
                         double noise_variance, SinrConvention convention, int cp_length,
                         const Eigen::MatrixXcd &receiver_gain)
{
    if (cp_length < downlink.length() - 1)
        throw ConfigError("ofdm_baseline: cyclic prefix of " + std::to_string(cp_length) +
                          " samples is shorter than the channel memory");
    const int K = downlink.num_users();
    const int M = static_cast<int>(weights.size());
    SinrReport r;
    r.signal.resize(K, M);
    r.interference.resize(K, M);
    r.noise.resize(K, M);
    for (int m = 0; m < M; ++m)
    {
        const Eigen::MatrixXcd G = downlink.frequency_matrix(m, M) * weights[m];
        for (int k = 0; k < K; ++k)
        {
            double leak = 0.0;
            for (int ks = 0; ks < K; ++ks)
                if (ks != k)
                    leak += std::norm(G(k, ks));
            if (convention == SinrConvention::unbiased)
            {
                r.signal(k, m) = std::norm(G(k, k));
                r.interference(k, m) = leak;
                r.noise(k, m) = noise_variance;
            }
            else
            {
                const cplx g = receiver_gain.size() ? receiver_gain(k, m) : cplx(1.0);
                const double g2 = std::norm(g);
                r.signal(k, m) = 1.0;
                r.interference(k, m) = std::norm(G(k, k) / g - 1.0) + leak / g2;
                r.noise(k, m) = noise_variance / g2;
            }
        }
    }
    return r;
}

double Cdf::quantile(double p) const
{
    if (values.empty())
        throw ConfigError("cdf: empty sample");
    const double h = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Cdf sir_cdf(const RVec &samples)
{
    if (samples.empty())
        throw ConfigError("sir_cdf: empty sample");
    Cdf c;
    c.values = samples;
    std::sort(c.values.begin(), c.values.end());
    const double n = static_cast<double>(c.values.size());
    for (std::size_t i = 0; i < c.values.size(); ++i)
        c.probabilities.push_back(static_cast<double>(i + 1) / n);
    return c;
}

} // namespace fbmc
