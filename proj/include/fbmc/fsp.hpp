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

// Fractionally spaced prefilter (FSP): per user and subcarrier, a short FIR
// with taps spaced M/2 samples apart, centred on tap floor(L/2), that
// flattens the equivalent channel across the subcarrier band including the
// overlap with both neighbours.

#pragma once

#include "fbmc/channel.hpp"
#include "fbmc/core_dsp.hpp"
#include "fbmc/types.hpp"

#include <Eigen/Dense>

#include <span>

namespace fbmc {

enum class FspMode { zf, mmse };

struct FspDesignSpec {
    FspMode mode = FspMode::zf;
    int length = 5;            // L_FSP
    double noise_weight = 0.0; // MMSE ridge
    int grid_per_spacing = 8;  // grid points per subcarrier spacing over [m-1, m+1]
};

struct FspDesign {
    CVec taps;
    double regularization = 0.0;
    bool regularization_raised = false;
    double weighted_residual = 0.0; // sum_g w |A T - 1|^2 / sum_g w
};

/// Frequency response of the prefilter at normalized frequency nu:
/// A(nu) = sum_j a[j] exp(-j 2 pi nu (j - D) M / 2).
cplx fsp_response(std::span<const cplx> taps, double nu, int M);

/// |F(nu)|^2 band weight of the prototype, nu in cycles per sample.
double prototype_weight(const PrototypeFilter &proto, double nu);

/// Weighted least squares fit of A(f) T(f) = 1 on the grid f = (m + u)/M,
/// u in [-1, 1], with weight |F(u/M)|^2 and ridge noise_weight (ZF mode uses
/// a 1e-10 relative ridge). Target is a baseband impulse response from delay 0.
FspDesign design_fsp(std::span<const cplx> target, int m, const FspDesignSpec &spec, const PrototypeFilter &proto);

/// a_m[j] = a_0[j] exp(j pi m (j - D)).
CVec baseband_shift_fsp(std::span<const cplx> baseband_taps, int m);

/// Coefficient-domain form of the prefilter on subcarrier m: the symbol at
/// slot p + s receives a[j] exp(-j pi (m + 1/2) s) times the input at slot p,
/// s = j - D. Returns an output sequence of the same length as the input.
CVec apply_fsp(std::span<const cplx> symbols, std::span<const cplx> taps, int m);
CVec apply_fsp(std::span<const double> symbols, std::span<const cplx> taps, int m);

enum class CorrectionForm { with_beta, unit_beta };

/// sqrt(q) lambda^2 / (beta + sigma_ef^2), or lambda^2 / (1 + sigma_ef^2).
double colocated_correction_factor(double q, double beta, double lambda, double sigma_ef2,
                                   CorrectionForm form = CorrectionForm::with_beta);

PowerDelayProfile corrected_pdp_colocated(const PowerDelayProfile &pdp, double q, double beta, double lambda,
                                          double sigma_ef2, CorrectionForm form = CorrectionForm::with_beta);

/// Subtract the estimation-error bias from an equivalent channel computed on
/// estimates (k == k_src only):
///   h[l] - N lambda sigma_et^2 sum_i sqrt(q_i) / (sum_i beta_i + N sigma_ef^2) exp(j 2 pi l m / M)
/// for l < num_estimated_taps. sqrt_q and betas run over the serving antennas.
CVec corrected_eqch_cellfree(std::span<const cplx> h_hat_eq, const Eigen::VectorXd &sqrt_q,
                             const Eigen::VectorXd &betas, double lambda, double sigma_et2, double sigma_ef2, int m,
                             int M, int k, int k_src, int num_estimated_taps);

/// p[l] = (1/N) sum_i |h_{k,i}[l]|^2 - debias over the first num_taps taps
/// (all taps when num_taps <= 0), floored at 0.
PowerDelayProfile estimate_pdp(const ChannelRealization &h_hat, int k, int num_taps = 0, double debias = 0.0);

/// Least-squares gain g = sum r s / sum s^2.
double estimate_downlink_gain(std::span<const double> received, std::span<const double> sent);

} // namespace fbmc
