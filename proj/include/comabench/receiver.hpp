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

// Symbol-level receivers: maximum-likelihood detection against an effective
// gain, the two-stage SIC receiver of conventional NOMA, and the
// channel-knowledge-free phase-sector decision of the constructive scheme.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "comabench/channel.hpp"
#include "comabench/constellation.hpp"
#include "comabench/rng.hpp"
#include "comabench/scenario.hpp"

namespace comabench {

/// argmin_m |y - gain * x_m|^2, ties to the smallest index.
inline int ml_detect(cx y, cx effective_gain, const PskConstellation& c) {
    if (!std::isfinite(effective_gain.real()) || !std::isfinite(effective_gain.imag()))
        throw std::invalid_argument("ml_detect: non-finite gain");
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < c.order(); ++m) {
        const double d = std::norm(y - effective_gain * c.symbol(m));
        if (d < best_d) {
            best_d = d;
            best = m;
        }
    }
    return best;
}

/// Two-stage SIC at the strong user: detect the weak user's symbol treating
/// the own signal as noise, subtract it, add the residual cancellation error
/// (circularly-symmetric Gaussian of variance sic_err_var), then detect the
/// own symbol.
inline std::pair<int, int> sic_receive(cx y, const ChannelVector& h1, const PrecoderPair& p,
                                       const PskConstellation& c, Rng& rng, double sic_err_var) {
    if (p.w1.size() != h1.size() || p.w2.size() != h1.size())
        throw std::invalid_argument("sic_receive: dimension mismatch");
    const cx g2 = dotu(h1.coeffs, p.w2);
    const cx g1 = dotu(h1.coeffs, p.w1);
    const int m2_hat = ml_detect(y, g2, c);
    cx residual = y - g2 * c.symbol(m2_hat);
    if (sic_err_var > 0.0) residual += rng.normal_complex(sic_err_var);
    const int m1_hat = ml_detect(residual, g1, c);
    return {m1_hat, m2_hat};
}

/// Phase-sector decision: the index whose sector [phi_m - pi/M, phi_m + pi/M)
/// contains arg(y). Needs no channel knowledge. y = 0 maps to index 0.
inline int ci_receive(cx y, const PskConstellation& c) {
    if (y == cx(0.0, 0.0)) return 0;
    const int M = c.order();
    const double sector = 2.0 * std::numbers::pi / M;
    double a = std::arg(y) + sector / 2.0;  // shift so sector m starts at m*sector
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    int m = static_cast<int>(std::floor(a / sector));
    if (m >= M) m -= M;
    return m;
}

}  // namespace comabench
