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

// FBMC-OQAM waveform primitives.
//
// Conventions used throughout the library:
//   basis(m, n)[l] = f[l - n M/2] exp(j 2 pi m l / M) theta(m, n)
//   theta(m, n)    = exp(j pi (m + n) / 2)
//   d_hat(m, n)    = Re{ sum_l r[l] conj(basis(m, n)[l]) }
// The prototype is real, unit energy and symmetric about l = kappa M / 2, so
// the modulation referenced to l = 0 keeps real-field orthogonality.

#pragma once

#include "fbmc/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fbmc {

class PrototypeFilter {
  public:
    PrototypeFilter(RVec taps, int num_subcarriers, int overlap);

    const RVec &taps() const { return taps_; }
    int num_subcarriers() const { return M_; }
    int overlap() const { return overlap_; }
    int length() const { return static_cast<int>(taps_.size()); }
    int half_symbol() const { return M_ / 2; }

    /// q[lag] = sum_l f[l] f[l - lag]; zero outside |lag| < length.
    double autocorrelation(int lag) const;

    /// Cross-ambiguity Y_delta[tau] = sum_t f[t + tau] f[t] exp(j 2 pi delta t / M).
    /// Tabulated for |delta| <= 2, computed directly otherwise.
    cplx ambiguity(int delta, int tau) const;

  private:
    cplx ambiguity_direct(int delta, int tau) const;

    RVec taps_;
    int M_;
    int overlap_;
    static constexpr int kTabulatedDelta = 2;
    std::vector<CVec> ambiguity_table_; // [delta + 2][tau + length - 1]
};

/// Frequency-sampling (PHYDYAS family) prototype with kappa * M taps.
PrototypeFilter design_prototype(int num_subcarriers, int overlap);

/// Dense (subcarrier, slot) plane of symbols for a single stream.
template <typename T> class SymbolPlane {
  public:
    SymbolPlane() = default;
    SymbolPlane(int num_subcarriers, int num_slots)
        : M_(num_subcarriers), S_(num_slots), data_(static_cast<std::size_t>(num_subcarriers) * num_slots)
    {
    }

    int num_subcarriers() const { return M_; }
    int num_slots() const { return S_; }
    T &operator()(int m, int n) { return data_[static_cast<std::size_t>(m) * S_ + n]; }
    const T &operator()(int m, int n) const { return data_[static_cast<std::size_t>(m) * S_ + n]; }
    std::span<T> row(int m) { return {data_.data() + static_cast<std::size_t>(m) * S_, static_cast<std::size_t>(S_)}; }
    std::span<const T> row(int m) const
    {
        return {data_.data() + static_cast<std::size_t>(m) * S_, static_cast<std::size_t>(S_)};
    }

  private:
    int M_ = 0;
    int S_ = 0;
    std::vector<T> data_;
};

/// Real OQAM symbols d[k][m][n] on the half-symbol grid, one plane per user.
class OqamGrid {
  public:
    OqamGrid(int num_users, int num_subcarriers, int num_slots);

    int num_users() const { return static_cast<int>(planes_.size()); }
    int num_subcarriers() const { return M_; }
    int num_slots() const { return S_; }
    double &at(int k, int m, int n) { return planes_[k](m, n); }
    double at(int k, int m, int n) const { return planes_[k](m, n); }
    const SymbolPlane<double> &plane(int k) const { return planes_[k]; }
    SymbolPlane<double> &plane(int k) { return planes_[k]; }

  private:
    int M_;
    int S_;
    std::vector<SymbolPlane<double>> planes_;
};

/// Complex QAM symbols q[k][m][slot] before staggering.
class QamGrid {
  public:
    QamGrid(int num_users, int num_subcarriers, int num_slots);

    int num_users() const { return static_cast<int>(planes_.size()); }
    int num_subcarriers() const { return M_; }
    int num_slots() const { return S_; }
    cplx &at(int k, int m, int n) { return planes_[k](m, n); }
    cplx at(int k, int m, int n) const { return planes_[k](m, n); }

  private:
    int M_;
    int S_;
    std::vector<SymbolPlane<cplx>> planes_;
};

struct ComplexSignal {
    CVec samples;
    double sample_rate_hz = 1.0;

    bool all_finite() const;
};

/// Real and imaginary parts go to consecutive half-symbol slots.
OqamGrid oqam_map(const QamGrid &qam);
QamGrid oqam_demap(const OqamGrid &grid);

/// Synthesis filter bank. Output length (S - 1) M / 2 + kappa M.
ComplexSignal synthesize(const SymbolPlane<double> &symbols, const PrototypeFilter &proto, double sample_rate_hz = 1.0);
/// Same basis, complex coefficients (precoded or prefiltered streams).
ComplexSignal synthesize(const SymbolPlane<cplx> &symbols, const PrototypeFilter &proto, double sample_rate_hz = 1.0);

/// Demodulate a single (m, n) symbol by correlating with its basis function.
double analyze(const ComplexSignal &r, const PrototypeFilter &proto, int m, int n);
/// Demodulate every (m, n) for n in [0, num_slots).
SymbolPlane<double> analyze_all(const ComplexSignal &r, const PrototypeFilter &proto, int num_slots);

/// exp(j pi (m_src + n_src - m - n) / 2) * exp(j pi (m_src - m) n): the phase
/// linking a source symbol to a target symbol in the transmultiplexer response.
cplx oqam_link_phase(int m, int n, int m_src, int n_src);

/// z[dn] = sum_v c[v] Y_delta[dn M/2 - v] for dn in [dn_min, dn_max], where c
/// is a baseband composite impulse response whose first sample sits at v0.
void ambiguity_projection(const PrototypeFilter &proto, std::span<const cplx> c, int v0, int delta, int dn_min,
                          int dn_max, std::span<cplx> out);

/// Minimum half-symbol window that captures a cascade of total length
/// total_length samples (FSP span included).
int response_window(const PrototypeFilter &proto, int total_length);

/// Transmultiplexer response g[n] from source symbol (m_src, n = 0) to target
/// symbol (m, n), through an equivalent channel and an optional FSP on the
/// source subcarrier. The demodulated contribution is Re{g[n]} * d.
struct TransmuxResponse {
    int m = 0;
    int m_src = 0;
    int window_half_width = 0;
    CVec coefficients; // n = -window .. window

    cplx at(int n) const;
};

TransmuxResponse transmux_response(const PrototypeFilter &proto, std::span<const cplx> equivalent_channel, int m,
                                   int m_src, std::optional<int> window = std::nullopt,
                                   std::span<const cplx> fsp_taps = {});

/// Baseband composite of an FSP (taps at half-symbol spacing, centred) and a
/// channel on subcarrier m_src: c[v] = (A * h)[v] exp(-j 2 pi m_src v / M).
/// Returns the first sample offset through v0.
CVec fsp_channel_composite(std::span<const cplx> fsp_taps, std::span<const cplx> channel, int m_src, int M,
                           int &v0);

} // namespace fbmc
