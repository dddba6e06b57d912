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

// Thin RAII wrapper over an FFTW plan. Planning is serialized (FFTW's planner
// is not thread-safe), execution on caller buffers is not.

#pragma once

#include "fbmc/types.hpp"

namespace fbmc::detail {

class Dft {
  public:
    enum class Direction { forward, backward };

    Dft(int size, Direction dir);
    ~Dft();
    Dft(const Dft &) = delete;
    Dft &operator=(const Dft &) = delete;

    int size() const { return n_; }

    // Unnormalized; forward uses exp(-j 2 pi k n / N). in and out may alias.
    void execute(const cplx *in, cplx *out) const;

  private:
    int n_;
    void *plan_ = nullptr;
    void *plan_inplace_ = nullptr;
};

} // namespace fbmc::detail
