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

#include "fbmc/fsp.hpp"

#include <algorithm>
#include <cmath>

namespace fbmc {

cplx fsp_response(std::span<const cplx> taps, double nu, int M)
{
    const int D = static_cast<int>(taps.size()) / 2;
    cplx acc = 0.0;
    for (std::size_t j = 0; j < taps.size(); ++j)
        acc += taps[j] * std::polar(1.0, -kPi * nu * M * (static_cast<int>(j) - D));
    return acc;
}

double prototype_weight(const PrototypeFilter &proto, double nu)
{
    cplx acc = 0.0;
    const RVec &f = proto.taps();
    for (int l = 0; l < proto.length(); ++l)
        acc += f[l] * std::polar(1.0, -2.0 * kPi * nu * l);
    return std::norm(acc);
}

FspDesign design_fsp(std::span<const cplx> target, int m, const FspDesignSpec &spec, const PrototypeFilter &proto)
{
    if (spec.length < 1)
        throw ConfigError("design_fsp: prefilter length must be >= 1");
    if (spec.grid_per_spacing < 1)
        throw ConfigError("design_fsp: grid density must be >= 1");
    if (spec.noise_weight < 0.0)
        throw ConfigError("design_fsp: noise weight must be >= 0");
    const bool nonzero = std::any_of(target.begin(), target.end(), [](const cplx &z) { return z != cplx(0.0); });
    if (!nonzero)
        throw ConfigError("design_fsp: target channel is zero");

    const int M = proto.num_subcarriers();
    const int Lf = spec.length;
    const int D = Lf / 2;
    const int G = 2 * spec.grid_per_spacing + 1;

    Eigen::MatrixXcd Phi(G, Lf);
    Eigen::VectorXcd b(G);
    double wsum = 0.0;
    for (int g = 0; g < G; ++g)
    {
        const double u = -1.0 + static_cast<double>(g) / spec.grid_per_spacing;
        const double nu = (m + u) / M;
        const double w = prototype_weight(proto, u / M);
        const double sw = std::sqrt(w);
        wsum += w;
        const cplx T = dtft(target, nu);
        for (int j = 0; j < Lf; ++j)
            Phi(g, j) = sw * T * std::polar(1.0, -kPi * nu * M * (j - D));
        b(g) = sw;
    }

    const Eigen::MatrixXcd R = Phi.adjoint() * Phi;
    const Eigen::VectorXcd rhs = Phi.adjoint() * b;
    const double scale = R.trace().real() / Lf;

    FspDesign out;
    double mu = spec.mode == FspMode::zf ? 1e-10 * scale : spec.noise_weight;
    for (int attempt = 0;; ++attempt)
    {
        Eigen::MatrixXcd A = R;
        A.diagonal().array() += mu;
        const Eigen::LDLT<Eigen::MatrixXcd> ldlt(A);
        const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
        const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
        if (ldlt.info() == Eigen::Success && dmin > 1e-13 * dmax)
        {
            const Eigen::VectorXcd a = ldlt.solve(rhs);
            out.taps.assign(a.data(), a.data() + a.size());
            break;
        }
        if (attempt > 40)
            throw NumericalError("design_fsp: normal equations stay singular");
        mu = std::max(mu * 10.0, 1e-12 * std::max(scale, 1e-300));
        out.regularization_raised = true;
    }
    out.regularization = mu;

    double resid = 0.0;
    for (int g = 0; g < G; ++g)
    {
        cplx fit = 0.0;
        for (int j = 0; j < Lf; ++j)
            fit += Phi(g, j) * out.taps[j];
        resid += std::norm(fit - b(g));
    }
    out.weighted_residual = resid / wsum;
    return out;
}

CVec baseband_shift_fsp(std::span<const cplx> baseband_taps, int m)
{
    const int D = static_cast<int>(baseband_taps.size()) / 2;
    CVec out(baseband_taps.begin(), baseband_taps.end());
    for (std::size_t j = 0; j < out.size(); ++j)
        if ((static_cast<long>(m) * (static_cast<int>(j) - D)) & 1L)
            out[j] = -out[j];
    return out;
}

namespace {
template <typename T> CVec apply_fsp_impl(std::span<const T> symbols, std::span<const cplx> taps, int m)
{
    const int S = static_cast<int>(symbols.size());
    const int Lf = static_cast<int>(taps.size());
    const int D = Lf / 2;
    CVec coef(Lf);
    for (int j = 0; j < Lf; ++j)
        coef[j] = taps[j] * std::polar(1.0, -kPi * (m + 0.5) * (j - D));
    CVec out(S, cplx(0.0));
    for (int p = 0; p < S; ++p)
    {
        if (symbols[p] == T(0))
            continue;
        for (int j = 0; j < Lf; ++j)
        {
            const int n = p + j - D;
            if (n >= 0 && n < S)
                out[n] += coef[j] * symbols[p];
        }
    }
    return out;
}
} // namespace

CVec apply_fsp(std::span<const cplx> symbols, std::span<const cplx> taps, int m)
{
    return apply_fsp_impl(symbols, taps, m);
}

CVec apply_fsp(std::span<const double> symbols, std::span<const cplx> taps, int m)
{
    return apply_fsp_impl(symbols, taps, m);
}

double colocated_correction_factor(double q, double beta, double lambda, double sigma_ef2, CorrectionForm form)
{
    const double den = form == CorrectionForm::with_beta ? beta + sigma_ef2 : 1.0 + sigma_ef2;
    if (!(den > 0.0))
        throw ConfigError("correction factor: denominator must be positive");
    const double num = form == CorrectionForm::with_beta ? std::sqrt(q) * lambda * lambda : lambda * lambda;
    return num / den;
}

PowerDelayProfile corrected_pdp_colocated(const PowerDelayProfile &pdp, double q, double beta, double lambda,
                                          double sigma_ef2, CorrectionForm form)
{
    const double c = colocated_correction_factor(q, beta, lambda, sigma_ef2, form);
    PowerDelayProfile out = pdp;
    for (double &p : out.taps)
        p *= c;
    return out;
}

CVec corrected_eqch_cellfree(std::span<const cplx> h_hat_eq, const Eigen::VectorXd &sqrt_q,
                             const Eigen::VectorXd &betas, double lambda, double sigma_et2, double sigma_ef2, int m,
                             int M, int k, int k_src, int num_estimated_taps)
{
    CVec out(h_hat_eq.begin(), h_hat_eq.end());
    if (k != k_src || sigma_et2 == 0.0)
        return out;
    const double N = static_cast<double>(sqrt_q.size());
    const double den = betas.sum() + N * sigma_ef2;
    if (!(den > 0.0))
        throw ConfigError("corrected_eqch_cellfree: denominator must be positive");
    const double term = N * lambda * sigma_et2 * sqrt_q.sum() / den;
    const int L = std::min<int>(num_estimated_taps, static_cast<int>(out.size()));
    for (int l = 0; l < L; ++l)
        out[l] -= term * std::polar(1.0, 2.0 * kPi * static_cast<double>((static_cast<long>(l) * m) % M) / M);
    return out;
}

PowerDelayProfile estimate_pdp(const ChannelRealization &h_hat, int k, int num_taps, double debias)
{
    if (h_hat.num_antennas() < 1)
        throw ConfigError("estimate_pdp: no antennas");
    const int L = num_taps > 0 ? std::min(num_taps, h_hat.length()) : h_hat.length();
    PowerDelayProfile p;
    p.taps.assign(L, 0.0);
    for (int i = 0; i < h_hat.num_antennas(); ++i)
        for (int l = 0; l < L; ++l)
            p.taps[l] += std::norm(h_hat.tap(k, i, l));
    for (double &x : p.taps)
        x = std::max(x / h_hat.num_antennas() - debias, 0.0);
    return p;
}

double estimate_downlink_gain(std::span<const double> received, std::span<const double> sent)
{
    if (received.size() != sent.size() || sent.empty())
        throw ConfigError("estimate_downlink_gain: need matching, non-empty pilot sequences");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < sent.size(); ++i)
    {
        num += received[i] * sent[i];
        den += sent[i] * sent[i];
    }
    if (den == 0.0)
        throw ConfigError("estimate_downlink_gain: pilots carry no energy");
    return num / den;
}

} // namespace fbmc
