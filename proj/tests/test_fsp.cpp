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
#include "fbmc/impairments.hpp"

#include <doctest.h>

#include <cmath>

using namespace fbmc;

namespace {

const PrototypeFilter &proto64()
{
    static const PrototypeFilter p = design_prototype(64, 4);
    return p;
}

// Weighted band residual evaluated independently of the design routine.
double band_residual(std::span<const cplx> taps, std::span<const cplx> target, int m)
{
    const auto &p = proto64();
    const int M = p.num_subcarriers();
    double num = 0.0, den = 0.0;
    for (int g = -64; g <= 64; ++g)
    {
        const double u = g / 64.0;
        const double nu = (m + u) / M;
        const double w = prototype_weight(p, u / M);
        num += w * std::norm(fsp_response(taps, nu, M) * dtft(target, nu) - 1.0);
        den += w;
    }
    return num / den;
}

CVec random_target(int L, std::uint64_t seed)
{
    Rng rng(seed);
    CVec h(L);
    for (int l = 0; l < L; ++l)
        h[l] = complex_normal(rng, std::exp(-0.4 * l));
    return h;
}

} // namespace

TEST_CASE("prototype weight peaks at the subcarrier centre")
{
    const auto &p = proto64();
    // |F(0)|^2 = (sum f)^2
    double s = 0.0;
    for (double v : p.taps())
        s += v;
    CHECK(prototype_weight(p, 0.0) == doctest::Approx(s * s));
    CHECK(prototype_weight(p, 0.5 / 64) < prototype_weight(p, 0.0));
    CHECK(prototype_weight(p, 2.0 / 64) < 1e-3 * prototype_weight(p, 0.0));
}

TEST_CASE("design_fsp: flat and scaled targets")
{
    const auto &p = proto64();
    for (int L : {1, 3, 5})
        for (int m : {0, 7})
        {
            FspDesignSpec spec;
            spec.length = L;
            const FspDesign d = design_fsp(CVec{cplx(1.0)}, m, spec, p);
            REQUIRE(static_cast<int>(d.taps.size()) == L);
            for (int j = 0; j < L; ++j)
                CHECK(std::abs(d.taps[j] - cplx(j == L / 2 ? 1.0 : 0.0)) < 1e-7);
            const FspDesign h = design_fsp(CVec{cplx(2.0)}, m, spec, p);
            for (int j = 0; j < L; ++j)
                CHECK(std::abs(h.taps[j] - cplx(j == L / 2 ? 0.5 : 0.0)) < 1e-7);
            CHECK(d.weighted_residual < 1e-12);
            CHECK_FALSE(d.regularization_raised);
        }
    FspDesignSpec bad;
    bad.length = 0;
    CHECK_THROWS_AS(design_fsp(CVec{cplx(1.0)}, 0, bad, p), ConfigError);
    CHECK_THROWS_AS(design_fsp(CVec{cplx(0.0), cplx(0.0)}, 0, FspDesignSpec{}, p), ConfigError);
}

TEST_CASE("design_fsp: residual shrinks with length and the fit is a least-squares optimum")
{
    const auto &p = proto64();
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        // a long target so that a single tap cannot flatten the band
        const CVec h = random_target(14, seed);
        double prev = 1e300;
        for (int L : {1, 3, 5, 7})
        {
            FspDesignSpec spec;
            spec.length = L;
            spec.grid_per_spacing = 32;
            const FspDesign d = design_fsp(h, 5, spec, p);
            const double r = band_residual(d.taps, h, 5);
            CHECK(r < prev);
            prev = r;
            // perturbing any tap cannot lower the residual
            for (int j = 0; j < L; ++j)
                for (cplx e : {cplx(1e-3), cplx(0.0, 1e-3)})
                {
                    CVec t = d.taps;
                    t[j] += e;
                    CHECK(band_residual(t, h, 5) >= r - 1e-12);
                }
        }
    }
}

TEST_CASE("design_fsp: mmse ridge shrinks the taps")
{
    const auto &p = proto64();
    const CVec h = random_target(10, 9);
    FspDesignSpec zf;
    FspDesignSpec mmse;
    mmse.mode = FspMode::mmse;
    mmse.noise_weight = 10.0;
    const FspDesign a = design_fsp(h, 3, zf, p);
    const FspDesign b = design_fsp(h, 3, mmse, p);
    double na = 0.0, nb = 0.0;
    for (int j = 0; j < 5; ++j)
    {
        na += std::norm(a.taps[j]);
        nb += std::norm(b.taps[j]);
    }
    CHECK(nb < na);
    CHECK(b.regularization == doctest::Approx(10.0));
}

TEST_CASE("baseband shift")
{
    const CVec a{cplx(0.1, 0.2), cplx(-0.3), cplx(1.0, -0.1), cplx(0.05, 0.4), cplx(-0.2, -0.2)};
    CHECK(baseband_shift_fsp(a, 0) == a);
    CHECK(baseband_shift_fsp(a, 6) == a);
    const CVec odd = baseband_shift_fsp(a, 3);
    for (int j = 0; j < 5; ++j)
        CHECK(std::abs(odd[j] - a[j] * std::polar(1.0, kPi * 3 * (j - 2))) < 1e-15);
    // shifting the taps moves the response by m subcarriers
    for (int m : {1, 4, 9})
    {
        const CVec s = baseband_shift_fsp(a, m);
        for (double nu : {-0.013, 0.0, 0.004, 0.02})
            CHECK(std::abs(fsp_response(s, nu + static_cast<double>(m) / 64, 64) - fsp_response(a, nu, 64)) < 1e-12);
    }
}

TEST_CASE("apply_fsp: identity, linearity and tap placement")
{
    const std::vector<double> x{0.0, 1.0, -2.0, 0.5, 0.0, 3.0};
    const CVec id{cplx(0.0), cplx(1.0), cplx(0.0)};
    const CVec y = apply_fsp(std::span<const double>(x), id, 4);
    for (std::size_t n = 0; n < x.size(); ++n)
        CHECK(std::abs(y[n] - cplx(x[n])) < 1e-15);

    const CVec a{cplx(0.2), cplx(1.0), cplx(-0.3, 0.1)};
    std::vector<double> imp(7, 0.0);
    imp[3] = 1.0;
    const int m = 5;
    const CVec r = apply_fsp(std::span<const double>(imp), a, m);
    for (int j = 0; j < 3; ++j)
        CHECK(std::abs(r[3 + j - 1] - a[j] * std::polar(1.0, -kPi * (m + 0.5) * (j - 1))) < 1e-15);

    CVec cx(x.begin(), x.end());
    CVec cx2(cx.size());
    for (std::size_t n = 0; n < cx.size(); ++n)
        cx2[n] = cx[n] * cplx(0.5, -1.0);
    const CVec y1 = apply_fsp(cx, a, m);
    const CVec y2 = apply_fsp(cx2, a, m);
    for (std::size_t n = 0; n < cx.size(); ++n)
        CHECK(std::abs(y2[n] - y1[n] * cplx(0.5, -1.0)) < 1e-14);
}

TEST_CASE("co-located correction factor")
{
    CHECK(colocated_correction_factor(1.0, 1.0, 1.0, 0.0) == doctest::Approx(1.0));
    const double lambda = 0.9207;
    CHECK(colocated_correction_factor(1.0, 1.0, lambda, 0.1) == doctest::Approx(lambda * lambda / 1.1));
    CHECK(colocated_correction_factor(1.0, 1.0, lambda, 0.1) == doctest::Approx(0.7706).epsilon(1e-4));
    CHECK(colocated_correction_factor(4.0, 3.0, 0.5, 1.0) == doctest::Approx(2.0 * 0.25 / 4.0));
    CHECK(colocated_correction_factor(4.0, 3.0, 0.5, 1.0, CorrectionForm::unit_beta) == doctest::Approx(0.25 / 2.0));
    CHECK_THROWS_AS(colocated_correction_factor(1.0, 0.0, 1.0, 0.0), ConfigError);

    const PowerDelayProfile p{{0.6, 0.4}};
    const PowerDelayProfile same = corrected_pdp_colocated(p, 1.0, 1.0, 1.0, 0.0);
    CHECK(same.taps == p.taps);
    const PowerDelayProfile c = corrected_pdp_colocated(p, 1.0, 1.0, lambda, 0.1);
    CHECK(c.taps[1] == doctest::Approx(0.4 * lambda * lambda / 1.1));
}

TEST_CASE("cell-free correction term")
{
    const CVec h{cplx(1.0, 0.5), cplx(-0.2), cplx(0.1, 0.1)};
    Eigen::VectorXd sq(4), b(4);
    sq << 0.1, 0.2, 0.3, 0.4;
    b << 1.0, 2.0, 0.5, 0.5;
    CHECK(corrected_eqch_cellfree(h, sq, b, 0.92, 0.0, 0.0, 3, 16, 0, 0, 3) == h);
    CHECK(corrected_eqch_cellfree(h, sq, b, 0.92, 0.1, 0.3, 3, 16, 0, 1, 3) == h);

    const double term = 4.0 * 0.92 * 0.1 * 1.0 / (4.0 + 4.0 * 0.3);
    const CVec c = corrected_eqch_cellfree(h, sq, b, 0.92, 0.1, 0.3, 3, 16, 1, 1, 2);
    for (int l = 0; l < 2; ++l)
        CHECK(std::abs(c[l] - (h[l] - term * std::polar(1.0, 2.0 * kPi * l * 3 / 16))) < 1e-14);
    CHECK(c[2] == h[2]);
}

TEST_CASE("pdp estimate")
{
    ChannelRealization same(1, 5, 3);
    for (int i = 0; i < 5; ++i)
    {
        same.tap(0, i, 0) = cplx(0.6, 0.0);
        same.tap(0, i, 1) = cplx(0.0, -0.3);
    }
    const PowerDelayProfile p = estimate_pdp(same, 0);
    CHECK(p.taps[0] == doctest::Approx(0.36));
    CHECK(p.taps[1] == doctest::Approx(0.09));
    CHECK(p.taps[2] == 0.0);
    CHECK(estimate_pdp(same, 0, 2).length() == 2);
    CHECK(estimate_pdp(ChannelRealization(1, 3, 4), 0).total_gain() == 0.0);

    // many antennas: the estimate carries the error variance on every tap
    const PowerDelayProfile truth{{0.5, 0.3, 0.2}};
    Rng rng(31);
    const int N = 10000;
    const ChannelRealization h = draw_channel({truth}, Eigen::MatrixXd::Ones(1, N), rng);
    const double s2 = 0.05;
    const ChannelRealization hh = add_estimation_error(h, EstimationErrorModel{s2, 3, 1}, rng);
    const PowerDelayProfile biased = estimate_pdp(hh, 0);
    const PowerDelayProfile debiased = estimate_pdp(hh, 0, 0, s2);
    for (int l = 0; l < 3; ++l)
    {
        CHECK(biased.taps[l] == doctest::Approx(truth.taps[l] + s2).epsilon(0.03));
        CHECK(debiased.taps[l] == doctest::Approx(truth.taps[l]).epsilon(0.05));
    }
}

TEST_CASE("downlink gain estimate")
{
    const std::vector<double> s{0.7, -0.7, 0.7, 0.7, -0.7};
    std::vector<double> r;
    for (double v : s)
        r.push_back(0.7706 * v);
    CHECK(estimate_downlink_gain(r, s) == doctest::Approx(0.7706));
    CHECK_THROWS_AS(estimate_downlink_gain(std::vector<double>{}, std::vector<double>{}), ConfigError);
    CHECK_THROWS_AS(estimate_downlink_gain(r, std::vector<double>{1.0}), ConfigError);

    // unbiased under additive noise
    Rng rng(41);
    std::normal_distribution<double> n(0.0, 0.3);
    const int pilots = 64;
    const int draws = 4000;
    double acc = 0.0;
    std::vector<double> sent(pilots), rec(pilots);
    for (int t = 0; t < draws; ++t)
    {
        for (int i = 0; i < pilots; ++i)
        {
            sent[i] = (i % 3 == 0) ? -1.0 : 1.0;
            rec[i] = 0.8 * sent[i] + n(rng);
        }
        acc += estimate_downlink_gain(rec, sent);
    }
    CHECK(acc / draws == doctest::Approx(0.8).epsilon(0.005));
}
