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

#include "fbmc/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fbmc {

Eigen::MatrixXcd mrt(const Eigen::MatrixXcd &H)
{
    Eigen::MatrixXcd P = H.adjoint();
    for (Eigen::Index k = 0; k < H.rows(); ++k)
    {
        const double d = H.row(k).squaredNorm();
        if (d == 0.0)
            throw NumericalError("mrt: user " + std::to_string(k) + " has an all-zero channel");
        P.col(k) /= d;
    }
    return P;
}

Eigen::MatrixXcd zf(const Eigen::MatrixXcd &H)
{
    if (H.rows() > H.cols())
        throw ConfigError("zf: needs at least as many antennas as users");
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H);
    const auto &s = svd.singularValues();
    const double cond = s(0) / s(s.size() - 1);
    if (!(s(s.size() - 1) > 0.0) || !(cond < 1e12))
    {
        std::ostringstream msg;
        msg << "zf: channel matrix is rank deficient (condition number " << cond << ")";
        throw NumericalError(msg.str());
    }
    const Eigen::MatrixXcd G = H * H.adjoint();
    return H.adjoint() * G.llt().solve(Eigen::MatrixXcd::Identity(H.rows(), H.rows()));
}

Eigen::MatrixXcd asymptotic_precoder(const Eigen::MatrixXcd &H, const Eigen::MatrixXd &betas, DeploymentMode mode)
{
    const Eigen::Index K = H.rows();
    const Eigen::Index N = H.cols();
    Eigen::MatrixXcd P = H.adjoint();
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const double scale = mode == DeploymentMode::colocated ? static_cast<double>(N) * betas(k, 0) : betas.row(k).sum();
        if (!(scale > 0.0))
            throw ConfigError("asymptotic_precoder: large-scale gains must be positive");
        P.col(k) /= scale;
    }
    return P;
}

PowerAllocation max_power(int num_users, int num_antennas, double p_max)
{
    PowerAllocation pa;
    pa.q = Eigen::MatrixXd::Constant(num_users, num_antennas, p_max / num_users);
    pa.p_max = p_max;
    return pa;
}

PowerAllocation fractional_power(const Eigen::MatrixXd &betas, double nu, double gamma, double p_max)
{
    if ((betas.array() <= 0.0).any())
        throw ConfigError("fractional_power: large-scale gains must be positive");
    const Eigen::VectorXd user_total = betas.rowwise().sum();
    const Eigen::VectorXd user_norm = user_total.array().pow(nu);
    // per-antenna load sum_k' beta_{k',i} / (sum_i' beta_{k',i'})^nu
    const Eigen::VectorXd load = (betas.array().colwise() / user_norm.array()).colwise().sum().transpose();

    PowerAllocation pa;
    pa.nu = nu;
    pa.gamma = gamma;
    pa.p_max = p_max;
    pa.q.resize(betas.rows(), betas.cols());
    for (Eigen::Index k = 0; k < betas.rows(); ++k)
        for (Eigen::Index i = 0; i < betas.cols(); ++i)
            pa.q(k, i) = betas(k, i) / (user_norm(k) * std::pow(load(i), gamma));
    pa.q *= p_max / pa.per_antenna_power().maxCoeff();
    return pa;
}

double ServiceSets::mean_set_size() const
{
    if (antennas.empty())
        return 0.0;
    double total = 0.0;
    for (const auto &b : antennas)
        total += static_cast<double>(b.size());
    return total / static_cast<double>(antennas.size());
}

Eigen::MatrixXd ServiceSets::mask(int num_antennas) const
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(antennas.size()), num_antennas);
    for (std::size_t k = 0; k < antennas.size(); ++k)
        for (int i : antennas[k])
            m(static_cast<Eigen::Index>(k), i) = 1.0;
    return m;
}

ServiceSets ap_select(const Eigen::MatrixXd &uplink_snr_db, double threshold_db, int antennas_per_ap)
{
    ServiceSets sets;
    sets.threshold_db = threshold_db;
    for (Eigen::Index k = 0; k < uplink_snr_db.rows(); ++k)
    {
        std::vector<int> aps;
        for (Eigen::Index a = 0; a < uplink_snr_db.cols(); ++a)
            if (uplink_snr_db(k, a) >= threshold_db)
                aps.push_back(static_cast<int>(a));
        if (aps.empty())
        {
            Eigen::Index best = 0;
            uplink_snr_db.row(k).maxCoeff(&best);
            aps.push_back(static_cast<int>(best));
        }
        std::vector<int> ant;
        for (int a : aps)
            for (int q = 0; q < antennas_per_ap; ++q)
                ant.push_back(a * antennas_per_ap + q);
        sets.aps.push_back(std::move(aps));
        sets.antennas.push_back(std::move(ant));
    }
    return sets;
}

Eigen::MatrixXcd user_centric_zf(const Eigen::MatrixXcd &H, const ServiceSets &sets)
{
    const Eigen::Index K = H.rows();
    if (static_cast<Eigen::Index>(sets.antennas.size()) != K)
        throw ConfigError("user_centric_zf: one service set per user required");
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(H.cols(), K);
    for (Eigen::Index k = 0; k < K; ++k)
    {
        const auto &B = sets.antennas[k];
        if (static_cast<Eigen::Index>(B.size()) == H.cols())
        {
            P.col(k) = zf(H).col(k);
            continue;
        }
        Eigen::MatrixXcd Hb(K, static_cast<Eigen::Index>(B.size()));
        for (std::size_t j = 0; j < B.size(); ++j)
            Hb.col(static_cast<Eigen::Index>(j)) = H.col(B[j]);
        const Eigen::MatrixXcd Pb = Hb.completeOrthogonalDecomposition().pseudoInverse();
        for (std::size_t j = 0; j < B.size(); ++j)
            P(B[j], k) = Pb(static_cast<Eigen::Index>(j), k);
    }
    if (!P.allFinite())
        throw NumericalError("user_centric_zf: non-finite precoder");
    return P;
}

Eigen::MatrixXcd precoding_weights(const Eigen::MatrixXcd &P, const Eigen::MatrixXd &q)
{
    Eigen::MatrixXcd W(P.rows(), P.cols());
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index k = 0; k < P.cols(); ++k)
            W(i, k) = std::sqrt(q(k, i)) * P(i, k);
    return W;
}

Eigen::VectorXd radiated_power(const std::vector<Eigen::MatrixXcd> &W)
{
    if (W.empty())
        return {};
    Eigen::VectorXd p = Eigen::VectorXd::Zero(W.front().rows());
    for (const auto &Wm : W)
        p += Wm.rowwise().squaredNorm();
    return p / static_cast<double>(W.size());
}

std::vector<Eigen::MatrixXcd> cellfree_weights(const std::vector<Eigen::MatrixXcd> &P, const Eigen::MatrixXd &q,
                                               const ServiceSets &sets, double p_max)
{
    if (P.empty())
        return {};
    const Eigen::MatrixXd mask = sets.mask(static_cast<int>(P.front().rows()));
    if (mask.rows() != q.rows() || mask.cols() != q.cols())
        throw ConfigError("cellfree_weights: allocation and service sets disagree in shape");
    const Eigen::MatrixXd q_served = q.cwiseProduct(mask);
    std::vector<Eigen::MatrixXcd> W;
    W.reserve(P.size());
    for (const auto &Pm : P)
        W.push_back(precoding_weights(Pm, q_served));
    // the precoder carries the inverse path loss, so the radiated power is
    // held to p_max by one common factor
    const double peak = radiated_power(W).maxCoeff();
    if (!(peak > 0.0) || !std::isfinite(peak))
        throw NumericalError("cellfree_weights: precoder radiates no finite power");
    for (auto &Wm : W)
        Wm *= std::sqrt(p_max / peak);
    return W;
}

CVec equivalent_channel(const Eigen::MatrixXcd &W, const ChannelRealization &h, int k, int k_src)
{
    CVec out(h.length(), cplx(0.0));
    for (int i = 0; i < h.num_antennas(); ++i)
    {
        const cplx w = W(i, k_src);
        if (w == cplx(0.0))
            continue;
        auto link = h.link(k, i);
        for (int l = 0; l < h.length(); ++l)
            out[l] += w * link[l];
    }
    return out;
}

} // namespace fbmc
