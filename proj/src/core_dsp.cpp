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

#include "fbmc/core_dsp.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>

namespace fbmc {

namespace {

// j^e for any integer e
cplx quarter_turn(long e)
{
    switch (((e % 4) + 4) % 4)
    {
    case 0:
        return {1.0, 0.0};
    case 1:
        return {0.0, 1.0};
    case 2:
        return {-1.0, 0.0};
    default:
        return {0.0, -1.0};
    }
}

cplx theta(int m, int n) { return quarter_turn(static_cast<long>(m) + n); }

// e^{j pi m n}
double alternating(int m, int n) { return ((static_cast<long>(m) * n) & 1L) ? -1.0 : 1.0; }

// Frequency-sampling coefficients H_1 .. H_{kappa-1}
RVec frequency_samples(int overlap)
{
    switch (overlap)
    {
    case 2:
        return {1.0 / std::sqrt(2.0)};
    case 3:
        return {0.91143783, 0.41143783};
    case 4:
        return {0.97195983, 1.0 / std::sqrt(2.0), 0.23514695};
    default:
        throw ConfigError("overlap factor must be 2, 3 or 4, got " + std::to_string(overlap));
    }
}

template <typename T>
ComplexSignal synthesize_impl(const SymbolPlane<T> &symbols, const PrototypeFilter &proto, double sample_rate_hz)
{
    const int M = proto.num_subcarriers();
    if (symbols.num_subcarriers() != M)
        throw ConfigError("synthesize: grid has " + std::to_string(symbols.num_subcarriers()) +
                          " subcarriers, prototype expects " + std::to_string(M));
    const int S = symbols.num_slots();
    const int L = proto.length();
    const RVec &f = proto.taps();

    ComplexSignal out;
    out.sample_rate_hz = sample_rate_hz;
    if (S == 0)
        return out;
    out.samples.assign(static_cast<std::size_t>(S - 1) * (M / 2) + L, cplx(0.0));

    detail::Dft idft(M, detail::Dft::Direction::backward);
    CVec u(M), v(M);
    for (int n = 0; n < S; ++n)
    {
        bool any = false;
        for (int m = 0; m < M; ++m)
        {
            const cplx s = symbols(m, n);
            u[m] = s * theta(m, n) * alternating(m, n);
            any = any || s != cplx(0.0);
        }
        if (!any)
            continue;
        idft.execute(u.data(), v.data());
        cplx *x = out.samples.data() + static_cast<std::size_t>(n) * (M / 2);
        for (int t = 0; t < L; ++t)
            x[t] += f[t] * v[t % M];
    }
    return out;
}

} // namespace

PrototypeFilter::PrototypeFilter(RVec taps, int num_subcarriers, int overlap)
    : taps_(std::move(taps)), M_(num_subcarriers), overlap_(overlap)
{
    if (M_ < 2 || M_ % 2 != 0)
        throw ConfigError("prototype: subcarrier count must be even and >= 2");
    if (static_cast<int>(taps_.size()) != M_ * overlap_)
        throw ConfigError("prototype: tap count must equal overlap * M");

    const int L = length();
    ambiguity_table_.resize(2 * kTabulatedDelta + 1);
    for (int d = -kTabulatedDelta; d <= kTabulatedDelta; ++d)
    {
        CVec &row = ambiguity_table_[d + kTabulatedDelta];
        row.resize(2 * L - 1);
        for (int tau = -(L - 1); tau <= L - 1; ++tau)
            row[tau + L - 1] = ambiguity_direct(d, tau);
    }
}

double PrototypeFilter::autocorrelation(int lag) const
{
    const int L = length();
    if (lag <= -L || lag >= L)
        return 0.0;
    double acc = 0.0;
    for (int l = std::max(0, lag); l < std::min(L, L + lag); ++l)
        acc += taps_[l] * taps_[l - lag];
    return acc;
}

cplx PrototypeFilter::ambiguity_direct(int delta, int tau) const
{
    const int L = length();
    cplx acc = 0.0;
    const double w = 2.0 * kPi * delta / M_;
    for (int t = std::max(0, -tau); t < std::min(L, L - tau); ++t)
        acc += taps_[t + tau] * taps_[t] * std::polar(1.0, w * t);
    return acc;
}

cplx PrototypeFilter::ambiguity(int delta, int tau) const
{
    const int L = length();
    if (tau <= -L || tau >= L)
        return 0.0;
    // the modulation is M-periodic in delta
    int d = ((delta % M_) + M_) % M_;
    if (d > M_ / 2)
        d -= M_;
    if (std::abs(d) <= kTabulatedDelta)
        return ambiguity_table_[d + kTabulatedDelta][tau + L - 1];
    return ambiguity_direct(d, tau);
}

PrototypeFilter design_prototype(int num_subcarriers, int overlap)
{
    if (num_subcarriers < 2 || num_subcarriers % 2 != 0)
        throw ConfigError("design_prototype: M must be even and >= 2, got " + std::to_string(num_subcarriers));
    const RVec H = frequency_samples(overlap);
    const int L = overlap * num_subcarriers;

    RVec f(L);
    double energy = 0.0;
    for (int l = 0; l < L; ++l)
    {
        double acc = 1.0;
        for (int k = 1; k < overlap; ++k)
        {
            const double sign = (k % 2) ? -1.0 : 1.0;
            acc += 2.0 * sign * H[k - 1] * std::cos(2.0 * kPi * k * l / L);
        }
        f[l] = acc;
        energy += acc * acc;
    }
    const double scale = 1.0 / std::sqrt(energy);
    for (double &x : f)
        x *= scale;
    return PrototypeFilter(std::move(f), num_subcarriers, overlap);
}

OqamGrid::OqamGrid(int num_users, int num_subcarriers, int num_slots)
    : M_(num_subcarriers), S_(num_slots), planes_(num_users, SymbolPlane<double>(num_subcarriers, num_slots))
{
}

QamGrid::QamGrid(int num_users, int num_subcarriers, int num_slots)
    : M_(num_subcarriers), S_(num_slots), planes_(num_users, SymbolPlane<cplx>(num_subcarriers, num_slots))
{
}

bool ComplexSignal::all_finite() const
{
    return std::all_of(samples.begin(), samples.end(),
                       [](const cplx &z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

OqamGrid oqam_map(const QamGrid &qam)
{
    OqamGrid grid(qam.num_users(), qam.num_subcarriers(), 2 * qam.num_slots());
    for (int k = 0; k < qam.num_users(); ++k)
        for (int m = 0; m < qam.num_subcarriers(); ++m)
            for (int s = 0; s < qam.num_slots(); ++s)
            {
                grid.at(k, m, 2 * s) = qam.at(k, m, s).real();
                grid.at(k, m, 2 * s + 1) = qam.at(k, m, s).imag();
            }
    return grid;
}

QamGrid oqam_demap(const OqamGrid &grid)
{
    QamGrid qam(grid.num_users(), grid.num_subcarriers(), grid.num_slots() / 2);
    for (int k = 0; k < qam.num_users(); ++k)
        for (int m = 0; m < qam.num_subcarriers(); ++m)
            for (int s = 0; s < qam.num_slots(); ++s)
                qam.at(k, m, s) = {grid.at(k, m, 2 * s), grid.at(k, m, 2 * s + 1)};
    return qam;
}

ComplexSignal synthesize(const SymbolPlane<double> &symbols, const PrototypeFilter &proto, double sample_rate_hz)
{
    return synthesize_impl(symbols, proto, sample_rate_hz);
}

ComplexSignal synthesize(const SymbolPlane<cplx> &symbols, const PrototypeFilter &proto, double sample_rate_hz)
{
    return synthesize_impl(symbols, proto, sample_rate_hz);
}

double analyze(const ComplexSignal &r, const PrototypeFilter &proto, int m, int n)
{
    const int M = proto.num_subcarriers();
    if (m < 0 || m >= M)
        throw ConfigError("analyze: subcarrier out of range");
    const long start = static_cast<long>(n) * (M / 2);
    if (n < 0 || start >= static_cast<long>(r.samples.size()))
        throw ConfigError("analyze: slot " + std::to_string(n) + " outside the received signal");

    const RVec &f = proto.taps();
    const long end = std::min<long>(start + proto.length(), static_cast<long>(r.samples.size()));
    cplx acc = 0.0;
    for (long l = start; l < end; ++l)
        acc += r.samples[l] * f[l - start] * std::polar(1.0, -2.0 * kPi * static_cast<double>((m * l) % M) / M);
    return (std::conj(theta(m, n)) * acc).real();
}

SymbolPlane<double> analyze_all(const ComplexSignal &r, const PrototypeFilter &proto, int num_slots)
{
    const int M = proto.num_subcarriers();
    const int L = proto.length();
    const RVec &f = proto.taps();
    const long len = static_cast<long>(r.samples.size());

    SymbolPlane<double> out(M, num_slots);
    detail::Dft dft(M, detail::Dft::Direction::forward);
    CVec w(M), W(M);
    for (int n = 0; n < num_slots; ++n)
    {
        std::fill(w.begin(), w.end(), cplx(0.0));
        const long start = static_cast<long>(n) * (M / 2);
        for (int t = 0; t < L && start + t < len; ++t)
            w[t % M] += r.samples[start + t] * f[t];
        dft.execute(w.data(), W.data());
        for (int m = 0; m < M; ++m)
            out(m, n) = (std::conj(theta(m, n)) * alternating(m, n) * W[m]).real();
    }
    return out;
}

cplx oqam_link_phase(int m, int n, int m_src, int n_src)
{
    const long e = static_cast<long>(m_src) + n_src - m - n + 2L * (m_src - m) * n;
    return quarter_turn(e);
}

void ambiguity_projection(const PrototypeFilter &proto, std::span<const cplx> c, int v0, int delta, int dn_min,
                          int dn_max, std::span<cplx> out)
{
    const int half = proto.half_symbol();
    const int L = proto.length();
    const int len = static_cast<int>(c.size());
    for (int dn = dn_min; dn <= dn_max; ++dn)
    {
        cplx acc = 0.0;
        // tau = dn*M/2 - v must satisfy |tau| < L
        const int base = dn * half;
        const int v_lo = std::max(v0, base - L + 1);
        const int v_hi = std::min(v0 + len - 1, base + L - 1);
        for (int v = v_lo; v <= v_hi; ++v)
            acc += c[v - v0] * proto.ambiguity(delta, base - v);
        out[dn - dn_min] = acc;
    }
}

int response_window(const PrototypeFilter &proto, int total_length)
{
    const int half = proto.half_symbol();
    return 2 * proto.overlap() + (std::max(total_length, 1) + half - 1) / half + 1;
}

cplx TransmuxResponse::at(int n) const
{
    if (n < -window_half_width || n > window_half_width)
        return 0.0;
    return coefficients[n + window_half_width];
}

CVec fsp_channel_composite(std::span<const cplx> fsp_taps, std::span<const cplx> channel, int m_src, int M, int &v0)
{
    const int half = M / 2;
    CVec c;
    if (fsp_taps.empty())
    {
        v0 = 0;
        c.assign(channel.begin(), channel.end());
    }
    else
    {
        const int Lf = static_cast<int>(fsp_taps.size());
        const int D = Lf / 2;
        v0 = -D * half;
        c.assign(static_cast<std::size_t>((Lf - 1) * half) + channel.size(), cplx(0.0));
        for (int j = 0; j < Lf; ++j)
            for (std::size_t l = 0; l < channel.size(); ++l)
                c[static_cast<std::size_t>(j * half) + l] += fsp_taps[j] * channel[l];
    }
    for (std::size_t i = 0; i < c.size(); ++i)
    {
        const long v = v0 + static_cast<long>(i);
        const long r = ((static_cast<long>(m_src) * v) % M + M) % M;
        c[i] *= std::polar(1.0, -2.0 * kPi * static_cast<double>(r) / M);
    }
    return c;
}

TransmuxResponse transmux_response(const PrototypeFilter &proto, std::span<const cplx> equivalent_channel, int m,
                                   int m_src, std::optional<int> window, std::span<const cplx> fsp_taps)
{
    if (equivalent_channel.empty())
        throw ConfigError("transmux_response: empty channel");
    const int M = proto.num_subcarriers();
    int v0 = 0;
    const CVec c = fsp_channel_composite(fsp_taps, equivalent_channel, m_src, M, v0);
    const int reach = std::max(std::abs(v0), std::abs(v0 + static_cast<int>(c.size()) - 1));

    TransmuxResponse g;
    g.m = m;
    g.m_src = m_src;
    g.window_half_width = window.value_or(response_window(proto, reach + 1));
    const int W = g.window_half_width;
    g.coefficients.resize(2 * W + 1);
    ambiguity_projection(proto, c, v0, m_src - m, -W, W, g.coefficients);
    for (int n = -W; n <= W; ++n)
        g.coefficients[n + W] *= oqam_link_phase(m, n, m_src, 0);
    return g;
}

} // namespace fbmc
