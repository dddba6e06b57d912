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

#include <doctest.h>

#include <cmath>

using namespace fbmc;

namespace {

Eigen::MatrixXcd random_matrix(int rows, int cols, Rng &rng)
{
    Eigen::MatrixXcd H(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            H(r, c) = complex_normal(rng, 1.0);
    return H;
}

double max_abs(const Eigen::MatrixXcd &A) { return A.cwiseAbs().maxCoeff(); }

// error of the self equivalent channel against the shifted PDP, asymptotic precoder
double lln_error(int N, int draws, Rng &rng)
{
    const PowerDelayProfile p{{0.5, 0.3, 0.2}};
    const int M = 16;
    const int m = 3;
    double acc = 0.0;
    for (int t = 0; t < draws; ++t)
    {
        const ChannelRealization h = draw_channel({p}, Eigen::MatrixXd::Ones(1, N), rng);
        const Eigen::MatrixXcd P = asymptotic_precoder(h.frequency_matrix(m, M), h.betas, DeploymentMode::colocated);
        const CVec heq = equivalent_channel(P, h, 0, 0);
        double e = 0.0;
        for (int l = 0; l < 3; ++l)
            e += std::norm(heq[l] - p.taps[l] * std::polar(1.0, 2.0 * kPi * l * m / M));
        acc += std::sqrt(e);
    }
    return acc / draws;
}

} // namespace

TEST_CASE("mrt examples")
{
    Eigen::MatrixXcd H(1, 2);
    H << 1.0, kJ;
    const Eigen::MatrixXcd P = mrt(H);
    CHECK(std::abs(P(0, 0) - cplx(0.5)) < 1e-15);
    CHECK(std::abs(P(1, 0) - cplx(0.0, -0.5)) < 1e-15);

    Eigen::MatrixXcd s(1, 1);
    s << 2.5;
    CHECK(std::abs(mrt(s)(0, 0) - cplx(0.4)) < 1e-15);

    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(2, 3);
    z(0, 0) = 1.0;
    CHECK_THROWS_AS(mrt(z), NumericalError);
}

TEST_CASE("mrt equals zf on orthonormal rows")
{
    Rng rng(4);
    const Eigen::MatrixXcd A = random_matrix(6, 6, rng);
    const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(A).householderQ();
    const Eigen::MatrixXcd H = Q.topRows(3) * 2.0;
    CHECK(max_abs(mrt(H) - zf(H)) < 1e-12);
}

TEST_CASE("zf nulling and special cases")
{
    Rng rng(6);
    const Eigen::MatrixXcd H = random_matrix(4, 16, rng);
    const Eigen::MatrixXcd P = zf(H);
    CHECK(P.rows() == 16);
    CHECK(P.cols() == 4);
    CHECK(max_abs(H * P - Eigen::MatrixXcd::Identity(4, 4)) <= 1e-10);

    const Eigen::MatrixXcd h1 = random_matrix(1, 8, rng);
    CHECK(max_abs(zf(h1) - mrt(h1)) < 1e-12);
    CHECK(std::abs((h1 * zf(h1))(0, 0) - cplx(1.0)) < 1e-12);

    const Eigen::MatrixXcd U = Eigen::HouseholderQR<Eigen::MatrixXcd>(random_matrix(5, 5, rng)).householderQ();
    CHECK(max_abs(zf(U) - U.adjoint()) < 1e-12);

    Eigen::MatrixXcd deficient = random_matrix(3, 8, rng);
    deficient.row(2) = deficient.row(0) * cplx(2.0, -1.0);
    CHECK_THROWS_AS(zf(deficient), NumericalError);
    CHECK_THROWS_AS(zf(random_matrix(5, 4, rng)), ConfigError);
}

TEST_CASE("asymptotic precoder")
{
    Eigen::MatrixXcd H(1, 1);
    H << cplx(2.0, 1.0);
    const Eigen::MatrixXcd P = asymptotic_precoder(H, Eigen::MatrixXd::Ones(1, 1), DeploymentMode::colocated);
    CHECK(std::abs(P(0, 0) - cplx(2.0, -1.0)) < 1e-15);

    Rng rng(7);
    const Eigen::MatrixXcd G = random_matrix(3, 10, rng);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(3, 10, 0.4);
    CHECK(max_abs(asymptotic_precoder(G, b, DeploymentMode::colocated) -
                  asymptotic_precoder(G, b, DeploymentMode::cellfree)) < 1e-15);
    CHECK_THROWS_AS(asymptotic_precoder(G, Eigen::MatrixXd::Zero(3, 10), DeploymentMode::colocated), ConfigError);

    // zf approaches the matched-filter limit as the array grows
    auto rel = [&](int N) {
        double acc = 0.0;
        for (int t = 0; t < 50; ++t)
        {
            const Eigen::MatrixXcd h = random_matrix(1, N, rng);
            const Eigen::MatrixXcd z = zf(h);
            acc += (z - asymptotic_precoder(h, Eigen::MatrixXd::Ones(1, N), DeploymentMode::colocated)).norm() /
                   z.norm();
        }
        return acc / 50;
    };
    CHECK(rel(256) < rel(64));
}

TEST_CASE("equivalent channel: flat zf gives a Kronecker delta")
{
    Rng rng(8);
    const int K = 4, N = 12;
    const ChannelRealization h =
        draw_channel(std::vector<PowerDelayProfile>(K, PowerDelayProfile{{1.0}}), Eigen::MatrixXd::Ones(K, N), rng);
    const Eigen::MatrixXcd P = zf(h.frequency_matrix(0, 64));
    for (int k = 0; k < K; ++k)
        for (int ks = 0; ks < K; ++ks)
        {
            const CVec heq = equivalent_channel(P, h, k, ks);
            CHECK(std::abs(heq[0] - cplx(k == ks ? 1.0 : 0.0)) <= 1e-10);
        }

    // N = K = 1 with a flat link
    ChannelRealization one(1, 1, 1);
    one.tap(0, 0, 0) = cplx(0.3, -0.7);
    Eigen::MatrixXcd P1(1, 1);
    P1 << 1.0 / one.tap(0, 0, 0);
    CHECK(std::abs(equivalent_channel(P1, one, 0, 0)[0] - cplx(1.0)) < 1e-15);
}

TEST_CASE("equivalent channel converges to the shifted PDP")
{
    Rng rng(2024);
    const double e64 = lln_error(64, 200, rng);
    const double e256 = lln_error(256, 200, rng);
    const double ratio = e256 / e64;
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.7);
}

TEST_CASE("power allocation")
{
    const PowerAllocation mp = max_power(4, 6, 0.25);
    CHECK(mp.q(2, 3) == doctest::Approx(0.0625));
    CHECK(mp.per_antenna_power().maxCoeff() == doctest::Approx(0.25));

    const PowerAllocation eq = fractional_power(Eigen::MatrixXd::Constant(3, 5, 1e-9), 0.6, 1.2, 0.25);
    CHECK(eq.q.maxCoeff() == doctest::Approx(eq.q.minCoeff()));

    Rng rng(11);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    Eigen::MatrixXd b(8, 16);
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 16; ++i)
            b(k, i) = u(rng);
    const PowerAllocation f0 = fractional_power(b, 0.0, 0.0, 1.0);
    const Eigen::MatrixXd ratio = f0.q.array() / b.array();
    CHECK(ratio.maxCoeff() == doctest::Approx(ratio.minCoeff()));

    // direct evaluation of the allocation rule as oracle
    const double nu = 0.6, gamma = 1.2, p_max = 0.25;
    const PowerAllocation f = fractional_power(b, nu, gamma, p_max);
    Eigen::MatrixXd ref(8, 16);
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < 16; ++i)
        {
            double load = 0.0;
            for (int kk = 0; kk < 8; ++kk)
                load += b(kk, i) / std::pow(b.row(kk).sum(), nu);
            ref(k, i) = b(k, i) / (std::pow(b.row(k).sum(), nu) * std::pow(load, gamma));
        }
    Eigen::VectorXd ant = ref.colwise().sum().transpose();
    ref *= p_max / ant.maxCoeff();
    CHECK((f.q - ref).cwiseAbs().maxCoeff() < 1e-12 * p_max);
    const Eigen::VectorXd per = f.per_antenna_power();
    CHECK(per.maxCoeff() == doctest::Approx(p_max));
    CHECK((per.array() <= p_max * (1.0 + 1e-12)).all());
    CHECK((f.q.array() >= 0.0).all());

    // raising one gain never lowers its own share when nu = gamma = 0
    Eigen::MatrixXd b2 = b;
    b2(3, 7) *= 2.0;
    const PowerAllocation g0 = fractional_power(b2, 0.0, 0.0, 1.0);
    CHECK(g0.q(3, 7) / g0.q(0, 0) >= f0.q(3, 7) / f0.q(0, 0));

    CHECK_THROWS_AS(fractional_power(Eigen::MatrixXd::Zero(2, 2), nu, gamma, p_max), ConfigError);
}

TEST_CASE("ap selection")
{
    Eigen::MatrixXd snr(2, 3);
    snr << 3.0, -7.0, 12.0, -20.0, -30.0, -15.0;
    const auto all = ap_select(snr, -std::numeric_limits<double>::infinity(), 2);
    CHECK(all.aps[0].size() == 3);
    CHECK(all.antennas[1].size() == 6);

    const auto some = ap_select(snr, -5.0, 2);
    CHECK(some.aps[0] == std::vector<int>{0, 2});
    CHECK(some.antennas[0] == std::vector<int>{0, 1, 4, 5});
    // fallback to the strongest AP
    CHECK(some.aps[1] == std::vector<int>{2});
    CHECK(some.mean_set_size() == doctest::Approx(3.0));
    const Eigen::MatrixXd mask = some.mask(6);
    CHECK(mask.sum() == doctest::Approx(6.0));
    CHECK(mask(0, 4) == 1.0);
    CHECK(mask(0, 2) == 0.0);

    // set inclusion as the threshold rises
    Rng rng(13);
    std::normal_distribution<double> g(0.0, 10.0);
    Eigen::MatrixXd s(6, 25);
    for (int k = 0; k < 6; ++k)
        for (int a = 0; a < 25; ++a)
            s(k, a) = g(rng);
    double prev = 1e9;
    std::vector<std::vector<int>> prev_sets;
    for (double th = -20.0; th <= 10.0; th += 5.0)
    {
        const auto sets = ap_select(s, th, 4);
        CHECK(sets.mean_set_size() <= prev);
        if (!prev_sets.empty())
            for (int k = 0; k < 6; ++k)
                for (int a : sets.aps[k])
                    CHECK(std::find(prev_sets[k].begin(), prev_sets[k].end(), a) != prev_sets[k].end());
        prev = sets.mean_set_size();
        prev_sets = sets.aps;
    }
}

TEST_CASE("user-centric zf")
{
    Rng rng(14);
    const Eigen::MatrixXcd H = random_matrix(3, 12, rng);
    Eigen::MatrixXd snr = Eigen::MatrixXd::Zero(3, 3);
    const auto all = ap_select(snr, -std::numeric_limits<double>::infinity(), 4);
    CHECK(max_abs(user_centric_zf(H, all) - zf(H)) < 1e-12);

    // restricted sets: zero outside B_k, nulling still holds when |B_k| >= K
    ServiceSets sets;
    sets.antennas = {{0, 1, 2, 3, 4, 5}, {4, 5, 6, 7, 8, 9}, {0, 1, 2, 3, 8, 9, 10, 11}};
    sets.aps = {{0, 1}, {1, 2}, {0, 2}};
    const Eigen::MatrixXcd P = user_centric_zf(H, sets);
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 12; ++i)
            if (std::find(sets.antennas[k].begin(), sets.antennas[k].end(), i) == sets.antennas[k].end())
                CHECK(P(i, k) == cplx(0.0));
    CHECK(max_abs(H * P - Eigen::MatrixXcd::Identity(3, 3)) < 1e-10);
    CHECK_THROWS_AS(user_centric_zf(H, ServiceSets{}), ConfigError);
}

TEST_CASE("precoding weights and radiated power")
{
    Rng rng(15);
    const Eigen::MatrixXcd P = random_matrix(5, 2, rng);
    Eigen::MatrixXd q(2, 5);
    q << 1, 2, 3, 4, 5, 0.5, 0.25, 0.125, 1, 2;
    const Eigen::MatrixXcd W = precoding_weights(P, q);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 2; ++k)
            CHECK(std::abs(W(i, k) - std::sqrt(q(k, i)) * P(i, k)) < 1e-15);
    const Eigen::VectorXd r = radiated_power({W, 2.0 * W});
    for (int i = 0; i < 5; ++i)
        CHECK(r(i) == doctest::Approx(2.5 * W.row(i).squaredNorm()));
}

TEST_CASE("cell-free weights")
{
    Rng rng(16);
    const int K = 3, N = 12;
    std::vector<Eigen::MatrixXcd> P;
    for (int m = 0; m < 4; ++m)
        P.push_back(random_matrix(N, K, rng));
    ServiceSets sets;
    sets.antennas = {{0, 1, 2, 3}, {4, 5, 6, 7, 8, 9, 10, 11}, {0, 1, 2, 3, 4, 5, 6, 7}};
    std::uniform_real_distribution<double> u(0.01, 0.1);
    Eigen::MatrixXd q(K, N);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < N; ++i)
            q(k, i) = u(rng);
    const auto W = cellfree_weights(P, q, sets, 0.25);
    REQUIRE(W.size() == 4);
    const Eigen::VectorXd r = radiated_power(W);
    CHECK(r.maxCoeff() == doctest::Approx(0.25));
    // one common factor relative to sqrt(q) P on the served links
    const double s = std::abs(W[0](0, 0)) / (std::sqrt(q(0, 0)) * std::abs(P[0](0, 0)));
    for (int m = 0; m < 4; ++m)
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < N; ++i)
            {
                const bool served = std::find(sets.antennas[k].begin(), sets.antennas[k].end(), i) !=
                                    sets.antennas[k].end();
                const cplx ref = served ? s * std::sqrt(q(k, i)) * P[m](i, k) : cplx(0.0);
                CHECK(std::abs(W[m](i, k) - ref) < 1e-12 * std::abs(P[m](i, k)) + 1e-300);
            }
    CHECK(cellfree_weights({}, q, sets, 0.25).empty());
}
