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

#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

namespace fbmc::detail {

namespace {
std::mutex &planner_mutex()
{
    static std::mutex mtx;
    return mtx;
}
} // namespace

Dft::Dft(int size, Direction dir) : n_(size)
{
    const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    // plans are made on scratch buffers and executed through the new-array interface
    std::vector<cplx> a(size), b(size);
    auto *pa = reinterpret_cast<fftw_complex *>(a.data());
    auto *pb = reinterpret_cast<fftw_complex *>(b.data());
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(size, pa, pb, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_inplace_ = fftw_plan_dft_1d(size, pa, pa, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Dft::~Dft()
{
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inplace_));
}

void Dft::execute(const cplx *in, cplx *out) const
{
    auto *pi = reinterpret_cast<fftw_complex *>(const_cast<cplx *>(in));
    auto *po = reinterpret_cast<fftw_complex *>(out);
    fftw_execute_dft(static_cast<fftw_plan>(in == out ? plan_inplace_ : plan_), pi, po);
}

} // namespace fbmc::detail
