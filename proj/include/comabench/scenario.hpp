// SPDX-License-Identifier: Apache-2.0
//
// comabench - multiuser MISO precoding workbench for constructive multiple access
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

#pragma once

#include <stdexcept>

#include "comabench/complex_ops.hpp"
#include "comabench/constellation.hpp"

namespace comabench {

/// All scalars defining one downlink NOMA pair instance. User 1 is the
/// strong user by convention (order_pair enforces the ordering on
/// realizations).
struct PairScenario {
    int n_antennas = 2;
    double var1 = 2.0;           // channel variance of user 1
    double var2 = 1.0;           // channel variance of user 2
    double noise1 = 1.0;         // AWGN variance at user 1
    double noise2 = 1.0;         // AWGN variance at user 2
    double sic_err_var = 0.0;    // residual variance after imperfect SIC
    double r1 = 1.0;             // target SINR user 1 (linear)
    double r2 = 1.0;             // target SINR user 2 (linear)
    double power_budget = 10.0;  // total transmit power P
    PskConstellation constellation{4};

    void validate() const {
        if (n_antennas < 1) throw std::invalid_argument("scenario: n_antennas must be >= 1");
        if (!(var1 >= 0.0) || !(var2 >= 0.0))
            throw std::invalid_argument("scenario: channel variances must be >= 0");
        if (!(noise1 > 0.0) || !(noise2 > 0.0))
            throw std::invalid_argument("scenario: noise variances must be > 0");
        if (!(sic_err_var >= 0.0)) throw std::invalid_argument("scenario: sic_err_var must be >= 0");
        if (!(r1 > 0.0) || !(r2 > 0.0))
            throw std::invalid_argument("scenario: target SINRs must be > 0");
        if (!(power_budget > 0.0)) throw std::invalid_argument("scenario: power budget must be > 0");
    }
};

/// The two precoding vectors produced by any scheme, amplitude units
/// (||.||^2 is power in watts).
struct PrecoderPair {
    cvec w1;
    cvec w2;

    void validate(std::size_t n) const {
        if (w1.size() != n || w2.size() != n)
            throw std::invalid_argument("PrecoderPair: dimension mismatch");
        if (!all_finite(w1) || !all_finite(w2))
            throw std::invalid_argument("PrecoderPair: non-finite entry");
    }
};

}  // namespace comabench
